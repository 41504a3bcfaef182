//! Versioned flat binary container for network weights and frame sets.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes  "LANERLCK"
//! version      u32      1
//! kind         u32      1 = actor-critic, 2 = vae, 3 = raster frames
//! block_count  u32
//! block_count x { n_sizes u32, sizes u32 x n_sizes, value_count u64 }
//! values       f64 x sum(value_count), blocks in header order
//! ```
//!
//! For networks `sizes` is the layer-size list; for a plain vector it is
//! its length; for frame sets it is `[width, height, count]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::nn::{param_count, Mlp};
use crate::observation::Vae;
use crate::rl::{ActorCritic, GaussianPolicy, ValueFunction};

pub const MAGIC: &[u8; 8] = b"LANERLCK";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Kind {
    ActorCritic = 1,
    Vae = 2,
    Frames = 3,
}

impl Kind {
    fn from_u32(v: u32) -> Result<Kind> {
        match v {
            1 => Ok(Kind::ActorCritic),
            2 => Ok(Kind::Vae),
            3 => Ok(Kind::Frames),
            other => Err(Error::format("checkpoint", format!("unknown kind {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
}

impl Block {
    fn mlp(net: &Mlp) -> Block {
        Block {
            sizes: net.sizes().to_vec(),
            values: net.params().to_vec(),
        }
    }

    fn vector(values: &[f64]) -> Block {
        Block {
            sizes: vec![values.len()],
            values: values.to_vec(),
        }
    }

    fn into_mlp(self) -> Result<Mlp> {
        if param_count(&self.sizes) != self.values.len() {
            return Err(Error::format("checkpoint", "layer sizes disagree with value count"));
        }
        Mlp::from_params(&self.sizes, self.values)
    }
}

pub fn write_blocks(writer: &mut impl Write, kind: Kind, blocks: &[Block]) -> Result<()> {
    writer.write_all(MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&(kind as u32).to_le_bytes())?;
    writer.write_all(&(blocks.len() as u32).to_le_bytes())?;
    for b in blocks {
        writer.write_all(&(b.sizes.len() as u32).to_le_bytes())?;
        for &s in &b.sizes {
            writer.write_all(&(s as u32).to_le_bytes())?;
        }
        writer.write_all(&(b.values.len() as u64).to_le_bytes())?;
    }
    for b in blocks {
        for v in &b.values {
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_blocks(reader: &mut impl Read) -> Result<(Kind, Vec<Block>)> {
    let mut magic = [0u8; 8];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::format("checkpoint", "bad magic"));
    }
    let version = read_u32(reader)?;
    if version != VERSION {
        return Err(Error::format("checkpoint", format!("unsupported version {version}")));
    }
    let kind = Kind::from_u32(read_u32(reader)?)?;
    let count = read_u32(reader)? as usize;
    let mut headers = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let n = read_u32(reader)? as usize;
        let sizes = (0..n)
            .map(|_| read_u32(reader).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        headers.push((sizes, read_u64(reader)? as usize));
    }
    let mut blocks = Vec::with_capacity(headers.len());
    for (sizes, len) in headers {
        let mut bytes = vec![0u8; len * 8];
        reader.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        blocks.push(Block { sizes, values });
    }
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(Error::format("checkpoint", "trailing bytes"));
    }
    Ok((kind, blocks))
}

fn save(path: &Path, kind: Kind, blocks: &[Block]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_blocks(&mut w, kind, blocks)?;
    w.flush()?;
    Ok(())
}

fn load(path: &Path, expected: Kind) -> Result<Vec<Block>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let (kind, blocks) = read_blocks(&mut BufReader::new(File::open(path)?))?;
    if kind != expected {
        return Err(Error::format(
            "checkpoint",
            format!("expected {expected:?} checkpoint, found {kind:?}"),
        ));
    }
    Ok(blocks)
}

pub fn actor_critic_blocks(model: &ActorCritic) -> Vec<Block> {
    vec![
        Block::mlp(&model.policy.mean_net),
        Block::vector(&model.policy.log_std),
        Block::mlp(&model.value_fn.net),
    ]
}

pub fn save_actor_critic(path: &Path, model: &ActorCritic) -> Result<()> {
    save(path, Kind::ActorCritic, &actor_critic_blocks(model))
}

pub fn load_actor_critic(path: &Path) -> Result<ActorCritic> {
    let blocks = load(path, Kind::ActorCritic)?;
    let [mean, log_std, value]: [Block; 3] = blocks
        .try_into()
        .map_err(|_| Error::format("checkpoint", "actor-critic needs 3 blocks"))?;
    let mean_net = mean.into_mlp()?;
    if log_std.values.len() != mean_net.output_dim() {
        return Err(Error::format("checkpoint", "log_std length disagrees with policy head"));
    }
    let value_net = value.into_mlp()?;
    if value_net.input_dim() != mean_net.input_dim() {
        return Err(Error::format("checkpoint", "policy and value input sizes differ"));
    }
    Ok(ActorCritic {
        policy: GaussianPolicy {
            mean_net,
            log_std: log_std.values,
        },
        value_fn: ValueFunction::new(value_net)?,
    })
}

pub fn save_vae(path: &Path, vae: &Vae) -> Result<()> {
    save(path, Kind::Vae, &[Block::mlp(&vae.encoder), Block::mlp(&vae.decoder)])
}

pub fn load_vae(path: &Path) -> Result<Vae> {
    let blocks = load(path, Kind::Vae)?;
    let [enc, dec]: [Block; 2] = blocks
        .try_into()
        .map_err(|_| Error::format("checkpoint", "vae needs 2 blocks"))?;
    Vae::from_nets(enc.into_mlp()?, dec.into_mlp()?)
}

/// Frame set: rows are flattened frames of `width x height` pixels.
pub fn save_frames(path: &Path, width: usize, height: usize, frames: &Array2<f64>) -> Result<()> {
    if frames.ncols() != width * height {
        return Err(Error::ShapeMismatch {
            context: "frame set",
            expected: width * height,
            got: frames.ncols(),
        });
    }
    let block = Block {
        sizes: vec![width, height, frames.nrows()],
        values: frames.iter().copied().collect(),
    };
    save(path, Kind::Frames, &[block])
}

pub fn load_frames(path: &Path) -> Result<(usize, usize, Array2<f64>)> {
    let mut blocks = load(path, Kind::Frames)?;
    let block = blocks
        .pop()
        .filter(|_| blocks.is_empty())
        .ok_or_else(|| Error::format("frame set", "expected exactly one block"))?;
    let [w, h, n]: [usize; 3] = block
        .sizes
        .as_slice()
        .try_into()
        .map_err(|_| Error::format("frame set", "header must be [width, height, count]"))?;
    let frames = Array2::from_shape_vec((n, w * h), block.values)
        .map_err(|e| Error::format("frame set", e.to_string()))?;
    Ok((w, h, frames))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::VaeConfig;
    use crate::rl::PpoHyper;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn actor_critic_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ac.bin");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = ActorCritic::new(9, &PpoHyper::default(), &mut rng).unwrap();
        save_actor_critic(&path, &model).unwrap();
        assert_eq!(load_actor_critic(&path).unwrap(), model);
        assert!(matches!(load_vae(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn vae_and_frames_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = VaeConfig {
            z_dim: 3,
            encoder_hidden: vec![7],
            decoder_hidden: vec![6],
            ..VaeConfig::default()
        };
        let vae = Vae::new(12, &cfg, &mut rng).unwrap();
        let p = dir.path().join("vae.bin");
        save_vae(&p, &vae).unwrap();
        assert_eq!(load_vae(&p).unwrap(), vae);

        let frames = Array2::from_shape_fn((5, 12), |(r, c)| (r * 12 + c) as f64 / 60.0);
        let p = dir.path().join("frames.bin");
        save_frames(&p, 3, 4, &frames).unwrap();
        let (w, h, back) = load_frames(&p).unwrap();
        assert_eq!((w, h), (3, 4));
        assert_eq!(back, frames);
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = Vec::new();
        write_blocks(&mut bytes, Kind::Vae, &[Block::vector(&[1.0, 2.0])]).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_blocks(&mut bad.as_slice()).is_err());
        let mut truncated = bytes.clone();
        truncated.pop();
        assert!(read_blocks(&mut truncated.as_slice()).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(read_blocks(&mut extra.as_slice()).is_err());
        let (kind, blocks) = read_blocks(&mut bytes.as_slice()).unwrap();
        assert_eq!(kind, Kind::Vae);
        assert_eq!(blocks[0].values, vec![1.0, 2.0]);
    }

    #[test]
    fn missing_file() {
        let err = load_vae(Path::new("/nonexistent/vae.bin")).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }
}
