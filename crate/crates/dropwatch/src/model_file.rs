//! Binary model files.
//!
//! All integers and floats are little-endian; floats are IEEE-754 binary64
//! so a save/load cycle is bit-exact.
//!
//! ```text
//! magic    8 bytes  "DWMODEL\0"
//! version  u16      1
//! kind     u8       0 = baseline, 1 = fourier, 2 = mlp
//! flags    u8       bit 0: derivative feature enabled
//! norm     f64 x 2  min, max of the training month
//! payload:
//!   baseline  f64 threshold
//!   fourier   u64 period, u32 harmonics H, f64 x (H+1) amplitudes, f64 x (H+1) phases
//!   mlp       u32 layer count L, u32 x (L+1) widths, f64 x N parameters
//! ```
//!
//! Trailing bytes are an error.

use std::path::Path;

use dropwatch_core::features::FeatureConfig;
use dropwatch_core::predictors::{BaselineModel, FourierModel, MlpModel, Model};
use dropwatch_core::series::NormalizationParams;

use crate::error::{write_file, Error, Result};

pub const MAGIC: &[u8; 8] = b"DWMODEL\0";
pub const VERSION: u16 = 1;

/// A trained model together with what is needed to apply it to new data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub model: Model,
    pub normalization: NormalizationParams,
    pub features: FeatureConfig,
}

fn kind_byte(model: &Model) -> u8 {
    match model {
        Model::Baseline(_) => 0,
        Model::Fourier(_) => 1,
        Model::Mlp(_) => 2,
    }
}

fn put_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn put_len(out: &mut Vec<u8>, n: usize, what: &str) -> Result<()> {
    let n = u32::try_from(n).map_err(|_| Error::ModelFormat(format!("{what} too large")))?;
    out.extend_from_slice(&n.to_le_bytes());
    Ok(())
}

pub fn encode(artifact: &ModelArtifact) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(kind_byte(&artifact.model));
    out.push(u8::from(artifact.features.use_derivative));
    put_f64s(
        &mut out,
        &[artifact.normalization.min(), artifact.normalization.max()],
    );
    match &artifact.model {
        Model::Baseline(b) => put_f64s(&mut out, &[b.threshold]),
        Model::Fourier(f) => {
            out.extend_from_slice(&f.period_points().to_le_bytes());
            put_len(&mut out, f.harmonics(), "harmonic count")?;
            put_f64s(&mut out, f.amplitudes());
            put_f64s(&mut out, f.phases());
        }
        Model::Mlp(m) => {
            put_len(&mut out, m.layer_count(), "layer count")?;
            for &w in m.widths() {
                put_len(&mut out, w, "layer width")?;
            }
            put_f64s(&mut out, m.params());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::ModelFormat(format!("truncated at byte {} (needed {n} more)", self.pos))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.array()?) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let remaining = (self.bytes.len() - self.pos) / 8;
        if n > remaining {
            return Err(Error::ModelFormat(format!(
                "expected {n} floats, only {remaining} remain"
            )));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode(bytes: &[u8]) -> Result<ModelArtifact> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len()).ok() != Some(&MAGIC[..]) {
        return Err(Error::ModelFormat("not a model file (bad magic)".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let kind = r.u8()?;
    let flags = r.u8()?;
    if flags & !1 != 0 {
        return Err(Error::ModelFormat(format!(
            "unknown flag bits {flags:#04x}"
        )));
    }
    let features = FeatureConfig {
        use_derivative: flags & 1 == 1,
    };
    let normalization = NormalizationParams::new(r.f64()?, r.f64()?)?;
    let model = match kind {
        0 => Model::Baseline(BaselineModel::new(r.f64()?)),
        1 => {
            let period = r.u64()?;
            let h = r.u32()?;
            let amplitudes = r.f64s(h + 1)?;
            let phases = r.f64s(h + 1)?;
            Model::Fourier(FourierModel::new(period, amplitudes, phases)?)
        }
        2 => {
            let layers = r.u32()?;
            if layers == 0 || layers > 4096 {
                return Err(Error::ModelFormat(format!(
                    "implausible layer count {layers}"
                )));
            }
            let widths = (0..=layers).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
            let n = widths
                .windows(2)
                .try_fold(0usize, |acc, w| {
                    w[0].checked_mul(w[1])?.checked_add(w[1])?.checked_add(acc)
                })
                .ok_or_else(|| Error::ModelFormat("parameter count overflows".into()))?;
            let params = r.f64s(n)?;
            Model::Mlp(MlpModel::new(widths, params)?)
        }
        k => return Err(Error::ModelFormat(format!("unknown model kind {k}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    if let Model::Mlp(m) = &model {
        if m.input_width() != features.width() {
            return Err(Error::ModelFormat(format!(
                "network input width {} does not match feature width {}",
                m.input_width(),
                features.width()
            )));
        }
    }
    Ok(ModelArtifact {
        model,
        normalization,
        features,
    })
}

pub fn save(path: &Path, artifact: &ModelArtifact) -> Result<()> {
    write_file(path, encode(artifact)?)
}

pub fn load(path: &Path) -> Result<ModelArtifact> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}
