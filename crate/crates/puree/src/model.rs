//! Versioned binary model container.
//!
//! Layout: 8-byte magic `PUREEMDL`, `u32` format version, `u32` payload
//! tag, then the payload. Network payloads are a `u32` layer count
//! followed by, per layer, `u32` activation tag, `u32` outputs, `u32`
//! inputs, the weight matrix row-major and the bias vector, all as
//! little-endian `f32`. Classifier payloads are a `u64` byte length and a
//! JSON document. A JSON sidecar next to the file records provenance.

use std::path::{Path, PathBuf};

use puree_core::classifiers::{RandomForest, SvmModel};
use puree_core::matrix::Matrix;
use puree_core::neural::{Activation, Autoencoder, DenseLayer, GeneralNetwork, StackedNet};
use serde::{Deserialize, Serialize};

use crate::error::{format_err, io_err, PureeError, Result};

pub const MAGIC: &[u8; 8] = b"PUREEMDL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
enum Tag {
    StackedNet = 1,
    GeneralNetwork = 2,
    Forest = 3,
    Svm = 4,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelPayload {
    Net(StackedNet),
    General(GeneralNetwork),
    Forest(RandomForest),
    Svm(SvmModel),
}

impl ModelPayload {
    fn tag(&self) -> Tag {
        match self {
            ModelPayload::Net(_) => Tag::StackedNet,
            ModelPayload::General(_) => Tag::GeneralNetwork,
            ModelPayload::Forest(_) => Tag::Forest,
            ModelPayload::Svm(_) => Tag::Svm,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelPayload::Net(_) => "stacked-net",
            ModelPayload::General(_) => "general-network",
            ModelPayload::Forest(_) => "random-forest",
            ModelPayload::Svm(_) => "svm",
        }
    }
}

/// Provenance written beside every model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSidecar {
    pub format_version: u32,
    pub kind: String,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Training configuration used to produce the model.
    pub config: serde_json::Value,
}

pub fn sidecar_path(model: &Path) -> PathBuf {
    model.with_extension("json")
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(
        &u32::try_from(v)
            .expect("dimension fits in u32")
            .to_le_bytes(),
    );
}

fn put_layer(out: &mut Vec<u8>, l: &DenseLayer) {
    put_u32(out, l.activation.tag() as usize);
    put_u32(out, l.output_dim());
    put_u32(out, l.input_dim());
    for &v in l.weights.as_slice().iter().chain(&l.bias) {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

pub fn encode_model(payload: &ModelPayload) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION as usize);
    put_u32(&mut out, payload.tag() as usize);
    let layers = |out: &mut Vec<u8>, ls: &[&DenseLayer]| {
        put_u32(out, ls.len());
        for l in ls {
            put_layer(out, l);
        }
    };
    let json = |out: &mut Vec<u8>, bytes: Vec<u8>| {
        out.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
        out.extend_from_slice(&bytes);
    };
    match payload {
        ModelPayload::Net(n) => layers(&mut out, &n.layers().iter().collect::<Vec<_>>()),
        ModelPayload::General(g) => layers(
            &mut out,
            &[
                &g.ae1.encoder,
                &g.ae1.decoder,
                &g.ae2.encoder,
                &g.ae2.decoder,
            ],
        ),
        ModelPayload::Forest(f) => {
            json(&mut out, serde_json::to_vec(f).expect("forest serializes"))
        }
        ModelPayload::Svm(s) => json(&mut out, serde_json::to_vec(s).expect("svm serializes")),
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end =
            end.ok_or_else(|| format_err(self.origin, format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            n.checked_mul(4)
                .ok_or_else(|| format_err(self.origin, "size overflow"))?,
        )?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect())
    }

    fn layer(&mut self) -> Result<DenseLayer> {
        let tag = self.u32()?;
        let act = Activation::from_tag(tag)
            .ok_or_else(|| format_err(self.origin, format!("unknown activation {tag}")))?;
        let (out, inp) = (self.u32()? as usize, self.u32()? as usize);
        let weights = self.f32s(out * inp)?;
        let bias = self.f32s(out)?;
        let w = Matrix::from_vec(out, inp, weights).expect("length checked");
        Ok(DenseLayer::new(w, bias, act)?)
    }

    fn layers(&mut self) -> Result<Vec<DenseLayer>> {
        let n = self.u32()? as usize;
        (0..n).map(|_| self.layer()).collect()
    }

    fn json<T: for<'de> Deserialize<'de>>(&mut self) -> Result<T> {
        let n = usize::try_from(self.u64()?)
            .map_err(|_| format_err(self.origin, "payload too large"))?;
        let origin = self.origin.to_path_buf();
        serde_json::from_slice(self.take(n)?).map_err(|source| PureeError::Json {
            path: origin,
            source,
        })
    }
}

pub fn decode_model(bytes: &[u8], origin: &Path) -> Result<ModelPayload> {
    let mut r = Reader {
        bytes,
        pos: 0,
        origin,
    };
    if r.take(8)? != MAGIC {
        return Err(format_err(origin, "not a model file (bad magic)"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(format_err(
            origin,
            format!("unsupported format version {version}"),
        ));
    }
    let tag = r.u32()?;
    let payload = match tag {
        t if t == Tag::StackedNet as u32 => {
            ModelPayload::Net(StackedNet::from_layers(r.layers()?)?)
        }
        t if t == Tag::GeneralNetwork as u32 => {
            let mut ls = r.layers()?.into_iter();
            let (Some(e1), Some(d1), Some(e2), Some(d2), None) =
                (ls.next(), ls.next(), ls.next(), ls.next(), ls.next())
            else {
                return Err(format_err(origin, "general network needs exactly 4 layers"));
            };
            ModelPayload::General(GeneralNetwork::new(
                Autoencoder::new(e1, d1)?,
                Autoencoder::new(e2, d2)?,
            )?)
        }
        t if t == Tag::Forest as u32 => ModelPayload::Forest(r.json()?),
        t if t == Tag::Svm as u32 => ModelPayload::Svm(r.json()?),
        other => return Err(format_err(origin, format!("unknown payload tag {other}"))),
    };
    if r.pos != bytes.len() {
        return Err(format_err(origin, "trailing bytes after payload"));
    }
    Ok(payload)
}

/// Writes the model and its sidecar.
pub fn save_model(path: &Path, payload: &ModelPayload, sidecar: &ModelSidecar) -> Result<()> {
    std::fs::write(path, encode_model(payload)).map_err(io_err(path))?;
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    std::fs::write(&side, text + "\n").map_err(io_err(side))
}

pub fn load_model(path: &Path) -> Result<ModelPayload> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_model(&bytes, path)
}

pub fn load_sidecar(path: &Path) -> Result<ModelSidecar> {
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(io_err(&side))?;
    serde_json::from_str(&text).map_err(|source| PureeError::Json { path: side, source })
}

/// Rounds every network weight to `f32`, matching what a save/load cycle
/// produces.
pub fn quantize(payload: &ModelPayload) -> ModelPayload {
    decode_model(&encode_model(payload), Path::new("<memory>"))
        .expect("freshly encoded model decodes")
}
