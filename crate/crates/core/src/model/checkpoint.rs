//! Binary checkpoint format.
//!
//! Little-endian layout: magic `CRNN` | u32 version | u32 record count |
//! records | trailing CRC32 of all preceding bytes. Each record is
//! u16 name length, name bytes, u8 rank, u32 dims, then the f32 payload
//! in row-major order. The first record, named `config`, carries the
//! network hyperparameters; the parameter records follow in canonical
//! order. Parameters are stored at 32-bit precision, which keeps the
//! default network under 2 MB.

use super::crnn::{Crnn, PARAM_NAMES};
use super::{CrnnConfig, ModelError};
use crate::tensor::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"CRNN";
pub const CHECKPOINT_VERSION: u32 = 1;
const CONFIG_RECORD: &str = "config";
const CONFIG_FIELDS: usize = 11;

fn config_record(config: &CrnnConfig) -> Vec<f32> {
    vec![
        config.input_width as f32,
        config.input_height as f32,
        config.conv1_units as f32,
        config.conv2_units as f32,
        config.dense_units as f32,
        config.lstm1_hidden as f32,
        config.lstm2_hidden as f32,
        config.classes as f32,
        config.dropout_rates[0] as f32,
        config.dropout_rates[1] as f32,
        config.dropout_rates[2] as f32,
    ]
}

fn config_from_record(vals: &[f32]) -> Result<CrnnConfig, ModelError> {
    if vals.len() != CONFIG_FIELDS {
        return Err(ModelError::CorruptCheckpoint(format!(
            "config record has {} fields, expected {CONFIG_FIELDS}",
            vals.len()
        )));
    }
    let dim = |v: f32| v.round() as usize;
    Ok(CrnnConfig {
        input_width: dim(vals[0]),
        input_height: dim(vals[1]),
        conv1_units: dim(vals[2]),
        conv2_units: dim(vals[3]),
        dense_units: dim(vals[4]),
        lstm1_hidden: dim(vals[5]),
        lstm2_hidden: dim(vals[6]),
        classes: dim(vals[7]),
        dropout_rates: [vals[8] as f64, vals[9] as f64, vals[10] as f64],
    })
}

fn write_record(buf: &mut Vec<u8>, name: &str, shape: &[usize], payload: impl Iterator<Item = f32>) {
    let name_bytes = name.as_bytes();
    buf.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
    buf.extend_from_slice(name_bytes);
    buf.push(shape.len() as u8);
    for &d in shape {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in payload {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_checkpoint(model: &Crnn, path: &Path) -> Result<(), ModelError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let params = model.params();
    buf.extend_from_slice(&(1 + params.len() as u32).to_le_bytes());

    write_record(
        &mut buf,
        CONFIG_RECORD,
        &[CONFIG_FIELDS],
        config_record(model.config()).into_iter(),
    );
    for (name, param) in PARAM_NAMES.iter().zip(&params) {
        write_record(
            &mut buf,
            name,
            param.value.shape(),
            param.value.data().iter().map(|&v| v as f32),
        );
    }

    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&buf);
    buf.extend_from_slice(&hasher.finalize().to_le_bytes());

    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.pos + n > self.buf.len() {
            return Err(ModelError::CorruptCheckpoint(format!(
                "truncated at byte {} of {}",
                self.pos,
                self.buf.len()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, ModelError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }
}

fn read_record(r: &mut Reader) -> Result<(String, Vec<usize>, Vec<f32>), ModelError> {
    let name_len = r.u16()? as usize;
    let name = String::from_utf8(r.take(name_len)?.to_vec())
        .map_err(|_| ModelError::CorruptCheckpoint("record name is not utf-8".into()))?;
    let rank = r.u8()? as usize;
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(r.u32()? as usize);
    }
    let count: usize = shape.iter().product();
    let raw = r.take(count * 4)?;
    let payload = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((name, shape, payload))
}

pub fn load_checkpoint(path: &Path) -> Result<Crnn, ModelError> {
    let buf = std::fs::read(path)?;
    if buf.len() < 12 {
        return Err(ModelError::CorruptCheckpoint("file shorter than the header".into()));
    }
    let (body, trailer) = buf.split_at(buf.len() - 4);
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(body);
    let want = u32::from_le_bytes(trailer.try_into().unwrap());
    if hasher.finalize() != want {
        return Err(ModelError::CorruptCheckpoint("crc mismatch".into()));
    }

    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(ModelError::CorruptCheckpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(ModelError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let record_count = r.u32()? as usize;
    if record_count != 1 + PARAM_NAMES.len() {
        return Err(ModelError::CorruptCheckpoint(format!(
            "{record_count} records, expected {}",
            1 + PARAM_NAMES.len()
        )));
    }

    let (name, shape, vals) = read_record(&mut r)?;
    if name != CONFIG_RECORD || shape != [CONFIG_FIELDS] {
        return Err(ModelError::CorruptCheckpoint(format!(
            "first record is {name:?}, expected {CONFIG_RECORD:?}"
        )));
    }
    let config = config_from_record(&vals)?;
    config.validate()?;

    // a zero-seed build gives correctly shaped parameters to overwrite
    let mut model = Crnn::build(config, &mut ChaCha8Rng::seed_from_u64(0))?;
    {
        let mut params = model.params_mut();
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            let (got_name, shape, payload) = read_record(&mut r)?;
            if got_name != *name {
                return Err(ModelError::CorruptCheckpoint(format!(
                    "record {i} is {got_name:?}, expected {name:?}"
                )));
            }
            if shape != params[i].value.shape() {
                return Err(ModelError::CorruptCheckpoint(format!(
                    "{name}: shape {shape:?} does not fit the config ({:?})",
                    params[i].value.shape()
                )));
            }
            let tensor = Tensor::new(shape, payload.into_iter().map(|v| v as f64).collect())
                .map_err(|e| ModelError::CorruptCheckpoint(e.to_string()))?;
            params[i].value = tensor;
            params[i].zero_grad();
        }
    }
    if r.pos != body.len() {
        return Err(ModelError::CorruptCheckpoint(format!(
            "{} trailing bytes",
            body.len() - r.pos
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(seed: u64, config: CrnnConfig) -> Crnn {
        Crnn::build(config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn round_trip_preserves_parameters_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = build(42, CrnnConfig::shrunken());
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.config(), model.config());
        for (a, b) in model.params().iter().zip(loaded.params()) {
            for (x, y) in a.value.data().iter().zip(b.value.data()) {
                assert_eq!(*x as f32, *y as f32);
                assert_eq!(*y, (*x as f32) as f64);
            }
        }
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.ckpt");
        let p2 = dir.path().join("b.ckpt");
        let model = build(7, CrnnConfig::shrunken());
        save_checkpoint(&model, &p1).unwrap();
        let loaded = load_checkpoint(&p1).unwrap();
        save_checkpoint(&loaded, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn default_checkpoint_is_under_two_megabytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("full.ckpt");
        let model = build(1, CrnnConfig::default());
        save_checkpoint(&model, &path).unwrap();
        let bytes = std::fs::metadata(&path).unwrap().len();
        assert!(bytes < 2 * 1024 * 1024, "checkpoint is {bytes} bytes");
        // parameters dominate: 377,542 * 4 bytes plus small headers
        assert!(bytes > 377_542 * 4);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = build(3, CrnnConfig::shrunken());
        save_checkpoint(&model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(ModelError::CorruptCheckpoint(_))
        ));
    }

    #[test]
    fn wrong_magic_and_version_are_distinct_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = build(3, CrnnConfig::shrunken());
        save_checkpoint(&model, &path).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        let fix_crc = |mut bytes: Vec<u8>| {
            let n = bytes.len();
            let mut h = crc32fast::Hasher::new();
            h.update(&bytes[..n - 4]);
            let crc = h.finalize().to_le_bytes();
            bytes[n - 4..].copy_from_slice(&crc);
            bytes
        };
        std::fs::write(&path, fix_crc(bad_magic)).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(ModelError::CorruptCheckpoint(_))
        ));

        let mut bad_version = good.clone();
        bad_version[4..8].copy_from_slice(&9u32.to_le_bytes());
        std::fs::write(&path, fix_crc(bad_version)).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(ModelError::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn flipped_payload_bit_fails_crc() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = build(3, CrnnConfig::shrunken());
        save_checkpoint(&model, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(ModelError::CorruptCheckpoint(_))
        ));
    }

    #[test]
    fn loaded_model_reproduces_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let mut model = build(11, CrnnConfig::shrunken());
        // quantize to f32 first so save -> load is lossless for inference
        for p in model.params_mut() {
            for v in p.value.data_mut() {
                *v = (*v as f32) as f64;
            }
        }
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        let image = Tensor::filled(vec![8, 16, 1], 0.4);
        let a = model.infer(&image).unwrap();
        let b = loaded.infer(&image).unwrap();
        assert_eq!(a, b);
    }
}
