//! Binary chain snapshots.
//!
//! Layout, all integers and floats little-endian:
//!
//! | field | encoding |
//! |---|---|
//! | magic | 8 bytes `MOYALCKP` |
//! | version | u32 |
//! | params | dim u32, n u64, omega f64, mu f64, alpha f64, allow_large_omega u8, linear_term u8 |
//! | plan | therm u64, meas u64, interval u64, seed u64, stream u64, start u8, proposal f64, hot f64 |
//! | rng | key 32 bytes, stream u64, word position u128 |
//! | counters | cursor u64, sweeps u64, steps u64, accepted u64, max drift f64 |
//! | fields | count u32, then per field `n*n` pairs (re f64, im f64), row-major |
//! | records | count u64, gauge count u32, then per record `8 + 3 * gauge` f64 in series column order |
//!
//! The action cache is not stored; it is rebuilt from the fields on load,
//! which is bit-identical to the refresh done at every sweep boundary.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::MatrixAction;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{Dim, FieldConfig, LinearTermConvention, ModelParams};
use crate::observables::{ObservableRecord, TimeSeriesBundle};
use crate::sampler::{ChainState, MatrixChain, RunPlan, Start};

pub const MAGIC: &[u8; 8] = b"MOYALCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("size does not fit in memory".into()))
    }
}

fn bad(what: &str) -> Error {
    Error::Checkpoint(format!("invalid {what}"))
}

pub fn encode(chain: &MatrixChain) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(CHECKPOINT_VERSION);

    let p = chain.params();
    w.u32(p.dim.as_int());
    w.u64(p.n as u64);
    w.f64(p.omega);
    w.f64(p.mu);
    w.f64(p.alpha);
    w.u8(p.allow_large_omega as u8);
    w.u8(match p.linear_term {
        LinearTermConvention::Standard => 0,
        LinearTermConvention::Hermitian => 1,
    });

    let plan = &chain.plan;
    w.u64(plan.therm_sweeps);
    w.u64(plan.meas_sweeps);
    w.u64(plan.meas_interval);
    w.u64(plan.seed);
    w.u64(plan.stream);
    w.u8(match plan.start {
        Start::Hot => 0,
        Start::Cold => 1,
    });
    w.f64(plan.proposal_amplitude);
    w.f64(plan.hot_amplitude);

    let st = &chain.state;
    w.0.extend_from_slice(&st.rng.get_seed());
    w.u64(st.rng.get_stream());
    w.u128(st.rng.get_word_pos());

    w.u64(st.cursor as u64);
    w.u64(st.sweep_count);
    w.u64(st.step_count);
    w.u64(st.accept_count);
    w.f64(st.max_drift);

    let cfg = st.action.config();
    w.u32(cfg.num_fields() as u32);
    for f in 0..cfg.num_fields() {
        for z in cfg.field(f).entries() {
            w.f64(z.re);
            w.f64(z.im);
        }
    }

    w.u64(chain.records.len() as u64);
    w.u32(p.dim.num_gauge() as u32);
    for r in &chain.records {
        for v in TimeSeriesBundle::row(r) {
            w.f64(v);
        }
    }
    w.0
}

pub fn decode(data: &[u8]) -> Result<MatrixChain> {
    let mut r = Reader { data, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }

    let dim = Dim::from_int(r.u32()?).map_err(|_| bad("dimension"))?;
    let params = ModelParams {
        dim,
        n: r.usize()?,
        omega: r.f64()?,
        mu: r.f64()?,
        alpha: r.f64()?,
        allow_large_omega: r.u8()? != 0,
        linear_term: match r.u8()? {
            0 => LinearTermConvention::Standard,
            1 => LinearTermConvention::Hermitian,
            _ => return Err(bad("linear term convention")),
        },
    };
    params.validate()?;

    let plan = RunPlan {
        therm_sweeps: r.u64()?,
        meas_sweeps: r.u64()?,
        meas_interval: r.u64()?,
        seed: r.u64()?,
        stream: r.u64()?,
        start: match r.u8()? {
            0 => Start::Hot,
            1 => Start::Cold,
            _ => return Err(bad("start mode")),
        },
        proposal_amplitude: r.f64()?,
        hot_amplitude: r.f64()?,
    };
    plan.validate()?;

    let mut rng = ChaCha8Rng::from_seed(r.array::<32>()?);
    rng.set_stream(r.u64()?);
    rng.set_word_pos(r.u128()?);

    let cursor = r.usize()?;
    let sweep_count = r.u64()?;
    let step_count = r.u64()?;
    let accept_count = r.u64()?;
    let max_drift = r.f64()?;

    let num_fields = r.u32()? as usize;
    if num_fields != dim.num_fields() {
        return Err(bad("field count"));
    }
    let n = params.n;
    let read_matrix = |r: &mut Reader| -> Result<ComplexMatrix> {
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            entries.push(Complex64::new(r.f64()?, r.f64()?));
        }
        ComplexMatrix::from_rows(n, entries)
    };
    let psi = read_matrix(&mut r)?;
    let z = (1..num_fields).map(|_| read_matrix(&mut r)).collect::<Result<Vec<_>>>()?;
    let config = FieldConfig { psi, z };

    let count = r.usize()?;
    let gauge = r.u32()? as usize;
    if gauge != dim.num_gauge() {
        return Err(bad("record width"));
    }
    let mut records = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let mut head = [0.0; 8];
        for v in head.iter_mut() {
            *v = r.f64()?;
        }
        let (mut z_a2, mut z_02, mut z_12) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..gauge {
            z_a2.push(r.f64()?);
            z_02.push(r.f64()?);
            z_12.push(r.f64()?);
        }
        records.push(ObservableRecord {
            s_total: head[0],
            s_f: head[1],
            s_v0: head[2],
            s_v1: head[3],
            s_d: head[4],
            phi_a2: head[5],
            phi_02: head[6],
            phi_12: head[7],
            z_a2,
            z_02,
            z_12,
        });
    }
    if r.pos != data.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", data.len() - r.pos)));
    }

    let action = MatrixAction::new(params, config)?;
    if cursor >= action.num_sites() {
        return Err(bad("cursor"));
    }
    let mut state = ChainState::new(action, rng, plan.proposal_amplitude);
    state.cursor = cursor;
    state.sweep_count = sweep_count;
    state.step_count = step_count;
    state.accept_count = accept_count;
    state.max_drift = max_drift;
    Ok(MatrixChain { state, plan, records })
}

/// Writes through a temporary file and a rename, so a crash never leaves a torn checkpoint.
pub fn write(path: &Path, chain: &MatrixChain) -> Result<()> {
    let tmp = path.with_extension("ckpt.tmp");
    std::fs::write(&tmp, encode(chain))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<MatrixChain> {
    decode(&std::fs::read(path)?)
}
