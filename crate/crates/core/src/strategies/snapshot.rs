//! Binary learner snapshots: `CLS1` followed by tagged sections, each a
//! 4-byte tag, a u64 LE payload length and the payload. Real vectors are
//! stored as raw f64 LE so a restored learner continues bit-exactly.
//!
//! | tag    | payload                                                   |
//! |--------|-----------------------------------------------------------|
//! | `CONF` | JSON: strategy config, train config, seeds, sessions done |
//! | `RNGM` | memory RNG: 32-byte seed, u128 LE word position           |
//! | `DIAG` | JSON diagnostics                                          |
//! | `STAT` | u8 state tag, then the state body                         |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{StrategyConfig, TrainConfig};
use super::ewc::{EwcAnchor, EwcState};
use super::learner::{Diagnostics, Learner, SeedSet, StrategyState};
use super::lwf::TeacherSnapshot;
use super::memory::{MemoryBuffer, MemoryEntry, MemoryPolicy};
use super::si::SiState;
use crate::error::{Error, Result};
use crate::ndcore::blob::{self, Reader};
use crate::ndcore::ModelSpec;

const MAGIC: &[u8; 4] = b"CLS1";

#[derive(Serialize, Deserialize)]
struct Header {
    config: StrategyConfig,
    train: TrainConfig,
    seeds: SeedSet,
    completed: usize,
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn reals(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for &x in v {
            self.f64(x);
        }
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.0.extend_from_slice(b);
    }
    fn section(&mut self, tag: &[u8; 4], payload: &[u8]) {
        self.0.extend_from_slice(tag);
        self.bytes(payload);
    }
}

fn reals(r: &mut Reader<'_>) -> Result<Vec<f64>> {
    let n = r.u64()? as usize;
    if n.saturating_mul(8) > r.remaining() {
        return Err(Error::Decode(format!(
            "vector of {n} reals exceeds payload"
        )));
    }
    (0..n).map(|_| r.f64()).collect()
}

fn bytes<'a>(r: &mut Reader<'a>) -> Result<&'a [u8]> {
    let n = r.u64()? as usize;
    r.take(n)
}

fn write_buffer(w: &mut Writer, b: &MemoryBuffer) {
    w.u64(b.capacity as u64);
    w.u8(match b.policy {
        MemoryPolicy::Reservoir => 0,
        MemoryPolicy::ClassBalancedGreedy => 1,
        MemoryPolicy::PerTaskRing => 2,
    });
    w.u64(b.seen);
    w.u64(b.cursor() as u64);
    w.u64(b.entries.len() as u64);
    for e in &b.entries {
        w.u64(e.label as u64);
        w.u64(e.origin_task as u64);
        w.u64(e.id);
        w.reals(&e.features);
    }
}

fn read_buffer(r: &mut Reader<'_>) -> Result<MemoryBuffer> {
    let capacity = r.u64()? as usize;
    let policy = match r.u8()? {
        0 => MemoryPolicy::Reservoir,
        1 => MemoryPolicy::ClassBalancedGreedy,
        2 => MemoryPolicy::PerTaskRing,
        p => return Err(Error::Decode(format!("unknown memory policy {p}"))),
    };
    let seen = r.u64()?;
    let cursor = r.u64()? as usize;
    let n = r.u64()? as usize;
    if n > capacity {
        return Err(Error::Decode(format!(
            "{n} entries in a buffer of capacity {capacity}"
        )));
    }
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let label = r.u64()? as usize;
        let origin_task = r.u64()? as usize;
        let id = r.u64()?;
        let features = reals(r)?;
        entries.push(MemoryEntry {
            features,
            label,
            origin_task,
            id,
        });
    }
    Ok(MemoryBuffer::restored(
        capacity, policy, entries, seen, cursor,
    ))
}

fn write_state(w: &mut Writer, s: &StrategyState) -> Result<()> {
    match s {
        StrategyState::Stateless => w.u8(0),
        StrategyState::Ewc(e) => {
            w.u8(1);
            w.u64(e.anchors.len() as u64);
            for a in &e.anchors {
                w.reals(&a.params);
                w.reals(&a.fisher);
            }
        }
        StrategyState::Si(si) => {
            w.u8(2);
            match si {
                None => w.u8(0),
                Some(si) => {
                    w.u8(1);
                    w.f64(si.damping);
                    w.u64(si.consolidations as u64);
                    for v in [&si.omega, &si.importance, &si.task_start, &si.anchor] {
                        w.reals(v);
                    }
                }
            }
        }
        StrategyState::Lwf(t) => {
            w.u8(3);
            match t {
                None => w.u8(0),
                Some(t) => {
                    w.u8(1);
                    w.bytes(&serde_json::to_vec(&t.spec)?);
                    w.bytes(&blob::encode(&t.params));
                }
            }
        }
        StrategyState::Replay(b) => {
            w.u8(4);
            write_buffer(w, b);
        }
        StrategyState::GDumb(b) => {
            w.u8(5);
            write_buffer(w, b);
        }
        StrategyState::Episodic(rings) => {
            w.u8(6);
            w.u64(rings.len() as u64);
            for b in rings {
                write_buffer(w, b);
            }
        }
    }
    Ok(())
}

fn read_state(r: &mut Reader<'_>) -> Result<StrategyState> {
    Ok(match r.u8()? {
        0 => StrategyState::Stateless,
        1 => {
            let n = r.u64()? as usize;
            let mut anchors = Vec::with_capacity(n.min(1024));
            for _ in 0..n {
                let params = reals(r)?;
                let fisher = reals(r)?;
                anchors.push(EwcAnchor { params, fisher });
            }
            StrategyState::Ewc(EwcState { anchors })
        }
        2 => StrategyState::Si(match r.u8()? {
            0 => None,
            _ => {
                let damping = r.f64()?;
                let consolidations = r.u64()? as usize;
                Some(SiState {
                    damping,
                    consolidations,
                    omega: reals(r)?,
                    importance: reals(r)?,
                    task_start: reals(r)?,
                    anchor: reals(r)?,
                })
            }
        }),
        3 => StrategyState::Lwf(match r.u8()? {
            0 => None,
            _ => {
                let spec: ModelSpec = serde_json::from_slice(bytes(r)?)?;
                let params = blob::decode(bytes(r)?)?;
                spec.check_params(&params)
                    .map_err(|e| Error::Decode(e.to_string()))?;
                Some(TeacherSnapshot { spec, params })
            }
        }),
        4 => StrategyState::Replay(read_buffer(r)?),
        5 => StrategyState::GDumb(read_buffer(r)?),
        6 => {
            let n = r.u64()? as usize;
            let rings = (0..n).map(|_| read_buffer(r)).collect::<Result<Vec<_>>>()?;
            StrategyState::Episodic(rings)
        }
        k => return Err(Error::Decode(format!("unknown state tag {k}"))),
    })
}

impl Learner {
    pub fn snapshot(&self) -> Result<Vec<u8>> {
        let mut out = Writer::default();
        out.0.extend_from_slice(MAGIC);
        let header = Header {
            config: self.config().clone(),
            train: *self.train_config(),
            seeds: self.seeds(),
            completed: self.completed(),
        };
        out.section(b"CONF", &serde_json::to_vec(&header)?);
        let rng = self.memory_rng();
        let mut r = rng.get_seed().to_vec();
        r.extend_from_slice(&rng.get_word_pos().to_le_bytes());
        out.section(b"RNGM", &r);
        out.section(b"DIAG", &serde_json::to_vec(self.diagnostics())?);
        let mut st = Writer::default();
        write_state(&mut st, self.state())?;
        out.section(b"STAT", &st.0);
        Ok(out.0)
    }

    pub fn restore(buf: &[u8]) -> Result<Learner> {
        let mut r = Reader::new(buf);
        if r.take(4)? != MAGIC {
            return Err(Error::Decode("bad magic, expected CLS1".into()));
        }
        let mut header: Option<Header> = None;
        let mut rng: Option<ChaCha8Rng> = None;
        let mut diag: Option<Diagnostics> = None;
        let mut state: Option<StrategyState> = None;
        while r.remaining() > 0 {
            let tag: [u8; 4] = r.take(4)?.try_into().unwrap();
            let payload = bytes(&mut r)?;
            match &tag {
                b"CONF" => header = Some(serde_json::from_slice(payload)?),
                b"RNGM" => {
                    if payload.len() != 48 {
                        return Err(Error::Decode("RNGM section must hold 48 bytes".into()));
                    }
                    let mut g = ChaCha8Rng::from_seed(payload[..32].try_into().unwrap());
                    g.set_word_pos(u128::from_le_bytes(payload[32..].try_into().unwrap()));
                    rng = Some(g);
                }
                b"DIAG" => diag = Some(serde_json::from_slice(payload)?),
                b"STAT" => {
                    let mut sr = Reader::new(payload);
                    state = Some(read_state(&mut sr)?);
                    if sr.remaining() != 0 {
                        return Err(Error::Decode("trailing bytes in STAT section".into()));
                    }
                }
                // unknown sections are skipped for forward compatibility
                _ => {}
            }
        }
        let missing = |t: &str| Error::Decode(format!("snapshot lacks {t} section"));
        let h = header.ok_or_else(|| missing("CONF"))?;
        Learner::from_parts(
            h.config,
            h.train,
            h.seeds,
            h.completed,
            state.ok_or_else(|| missing("STAT"))?,
            rng.ok_or_else(|| missing("RNGM"))?,
            diag.unwrap_or_default(),
        )
    }
}
