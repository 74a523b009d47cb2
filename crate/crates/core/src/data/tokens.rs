//! ASCII token table for the 37-symbol plate character set.
//!
//! Digits map to themselves; the Persian letters use a bijective,
//! case-sensitive letter code (dal/Latin-D, sin/Latin-S, and shin/he
//! differ only in case). `X` is the reserved padding character and is
//! never a network class.

use super::DataError;
use crate::ctc::{LabelSequence, SymbolAlphabet};

/// Symbols recognizable on a plate; the CTC blank brings the network
/// class count to 38.
pub const PLATE_SYMBOL_COUNT: usize = 37;

/// Fills readings shorter than the standard eight characters.
pub const PAD_TOKEN: char = 'X';

/// Token order fixes the class ids: digits first, then the letters in
/// charset order (alef, be, pe, te, se, jim, dal, ze, sin, shin, sad,
/// ta, eyn, fa, qhaf, kaf, gaf, lam, mim, non, he, vav, ye, tashrifat,
/// malol, D, S).
const TOKENS: [char; PLATE_SYMBOL_COUNT] = [
    '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', // digits
    'A', 'B', 'P', 'T', 'C', 'J', 'd', 'Z', 's', 'H', 'U', 'I', 'E', 'F', 'Q', 'K', 'G', 'L',
    'M', 'N', 'h', 'V', 'Y', 'W', 'R', 'D', 'S',
];

pub fn token_to_id(token: char) -> Option<usize> {
    TOKENS.iter().position(|&t| t == token)
}

pub fn id_to_token(id: usize) -> Option<char> {
    TOKENS.get(id).copied()
}

/// The recognition alphabet: 37 symbols plus the trailing blank.
pub fn plate_alphabet() -> SymbolAlphabet {
    SymbolAlphabet::new(TOKENS.iter().map(|c| c.to_string()).collect()).expect("static table is valid")
}

/// Parses a token string into symbol ids; `context` names the source in
/// the error.
pub fn encode_label(text: &str, context: &str) -> Result<LabelSequence, DataError> {
    let alphabet = plate_alphabet();
    let mut ids = Vec::with_capacity(text.chars().count());
    for ch in text.chars() {
        match token_to_id(ch) {
            Some(id) => ids.push(id),
            None => {
                return Err(DataError::UnknownSymbol {
                    symbol: ch,
                    context: context.to_string(),
                })
            }
        }
    }
    Ok(LabelSequence::new(ids, &alphabet).expect("table ids are in range"))
}

pub fn decode_label(label: &LabelSequence) -> String {
    label
        .ids()
        .iter()
        .map(|&id| id_to_token(id).expect("label ids come from the table"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_a_bijection() {
        assert_eq!(TOKENS.len(), 37);
        for (i, &t) in TOKENS.iter().enumerate() {
            assert_eq!(token_to_id(t), Some(i));
            assert_eq!(id_to_token(i), Some(t));
        }
        let mut sorted = TOKENS.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 37, "duplicate token");
        assert!(!TOKENS.contains(&PAD_TOKEN), "pad must not be a class");
    }

    #[test]
    fn alphabet_puts_blank_last() {
        let al = plate_alphabet();
        assert_eq!(al.size(), 38);
        assert_eq!(al.blank_id(), 37);
    }

    #[test]
    fn encode_decode_round_trip() {
        let label = encode_label("12B45678", "test").unwrap();
        assert_eq!(label.len(), 8);
        assert_eq!(decode_label(&label), "12B45678");
    }

    #[test]
    fn unknown_symbol_is_named() {
        let err = encode_label("12&45678", "12&45678.png").unwrap_err();
        match err {
            DataError::UnknownSymbol { symbol, context } => {
                assert_eq!(symbol, '&');
                assert_eq!(context, "12&45678.png");
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn pad_is_not_encodable() {
        assert!(encode_label("1X", "test").is_err());
    }
}
