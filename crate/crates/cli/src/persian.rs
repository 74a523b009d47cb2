//! Bijection between ASCII tokens and the Persian forms they stand for.

use lpr_core::data::PAD_TOKEN;

/// (token, Persian form) for all 37 plate symbols. Digits map to
/// Extended Arabic-Indic digits; tashrifat and malol are written out in
/// full; D and S appear on plates as themselves.
const PAIRS: [(char, &str); 37] = [
    ('0', "۰"),
    ('1', "۱"),
    ('2', "۲"),
    ('3', "۳"),
    ('4', "۴"),
    ('5', "۵"),
    ('6', "۶"),
    ('7', "۷"),
    ('8', "۸"),
    ('9', "۹"),
    ('A', "الف"),
    ('B', "ب"),
    ('P', "پ"),
    ('T', "ت"),
    ('C', "ث"),
    ('J', "ج"),
    ('d', "د"),
    ('Z', "ز"),
    ('s', "س"),
    ('H', "ش"),
    ('U', "ص"),
    ('I', "ط"),
    ('E', "ع"),
    ('F', "ف"),
    ('Q', "ق"),
    ('K', "ک"),
    ('G', "گ"),
    ('L', "ل"),
    ('M', "م"),
    ('N', "ن"),
    ('h', "ه"),
    ('V', "و"),
    ('Y', "ی"),
    ('W', "تشریفات"),
    ('R', "معلول"),
    ('D', "D"),
    ('S', "S"),
];

/// Persian form of one token; the padding token maps to itself.
pub fn persian_of_token(token: char) -> Option<&'static str> {
    if token == PAD_TOKEN {
        return Some("X");
    }
    PAIRS.iter().find(|(t, _)| *t == token).map(|(_, p)| *p)
}

/// Inverse of [`persian_of_token`] on the 37 symbols.
pub fn token_of_persian(persian: &str) -> Option<char> {
    if persian == "X" {
        return Some(PAD_TOKEN);
    }
    PAIRS.iter().find(|(_, p)| *p == persian).map(|(t, _)| *t)
}

/// Maps a padded token string; forms are joined without separators.
pub fn persian_of_tokens(tokens: &str) -> String {
    tokens
        .chars()
        .map(|c| persian_of_token(c).unwrap_or("?"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpr_core::data::{id_to_token, PLATE_SYMBOL_COUNT};

    #[test]
    fn mapping_inverts_on_all_symbols() {
        for id in 0..PLATE_SYMBOL_COUNT {
            let token = id_to_token(id).unwrap();
            let persian = persian_of_token(token).unwrap();
            assert_eq!(token_of_persian(persian), Some(token), "token {token}");
        }
    }

    #[test]
    fn persian_forms_are_distinct() {
        let mut forms: Vec<&str> = PAIRS.iter().map(|(_, p)| *p).collect();
        forms.sort_unstable();
        forms.dedup();
        assert_eq!(forms.len(), 37);
    }

    #[test]
    fn pad_passes_through() {
        assert_eq!(persian_of_token('X'), Some("X"));
        assert_eq!(token_of_persian("X"), Some('X'));
    }

    #[test]
    fn sample_reading_maps() {
        assert_eq!(persian_of_tokens("12B45678"), "۱۲ب۴۵۶۷۸");
        assert_eq!(persian_of_tokens("12W456XX"), "۱۲تشریفات۴۵۶XX");
    }
}
