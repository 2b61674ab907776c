//! Finitely supported quarklet coefficient sequences.

use crate::error::{Error, Result};
use crate::index::{Bounds, QuarkletIndex, WaveletIndex, ROOT};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Address of one frame coefficient. The root owns two slots per degree: the
/// generator slot (the translated quark, conventionally written with level
/// `-1`) and the regular quarklet slot at `(p, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameSlot {
    /// Root generator slot for degree `p` (CSV level `-1`).
    Generator { degree: u32 },
    /// Quarklet slot `(p, j, k)` with `j >= 0`.
    Quarklet(QuarkletIndex),
}

impl FrameSlot {
    pub fn generator(degree: u32) -> Self {
        FrameSlot::Generator { degree }
    }

    pub fn quarklet(degree: u32, space: WaveletIndex) -> Self {
        FrameSlot::Quarklet(QuarkletIndex::new(degree, space))
    }

    pub fn degree(&self) -> u32 {
        match self {
            FrameSlot::Generator { degree } => *degree,
            FrameSlot::Quarklet(qi) => qi.degree(),
        }
    }

    /// The wavelet node owning this slot; generator slots belong to the root.
    pub fn owner(&self) -> WaveletIndex {
        match self {
            FrameSlot::Generator { .. } => ROOT,
            FrameSlot::Quarklet(qi) => qi.wavelet(),
        }
    }

    /// Signed level for ordering and CSV output (`-1` for generator slots).
    pub fn csv_level(&self) -> i64 {
        match self {
            FrameSlot::Generator { .. } => -1,
            FrameSlot::Quarklet(qi) => qi.wavelet().level() as i64,
        }
    }

    fn sort_key(&self) -> (i64, u64, u32) {
        match self {
            FrameSlot::Generator { degree } => (-1, 0, *degree),
            FrameSlot::Quarklet(qi) => {
                (qi.wavelet().level() as i64, qi.wavelet().translation(), qi.degree())
            }
        }
    }
}

impl Ord for FrameSlot {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for FrameSlot {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for FrameSlot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameSlot::Generator { degree } => write!(f, "({degree},-1,0)"),
            FrameSlot::Quarklet(qi) => write!(f, "{qi}"),
        }
    }
}

/// A finite mapping from frame slots to real coefficients, bounded by a
/// truncation level and degree.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    entries: BTreeMap<FrameSlot, f64>,
    bounds: Bounds,
}

impl CoefficientSequence {
    pub fn new(bounds: Bounds) -> Self {
        Self {
            entries: BTreeMap::new(),
            bounds,
        }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Stores a coefficient; zero values are kept out of the support.
    pub fn set(&mut self, slot: FrameSlot, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::MalformedCsv {
                line: 0,
                reason: format!("non-finite coefficient for {slot}"),
            });
        }
        let in_bounds = match slot {
            FrameSlot::Generator { degree } => degree <= self.bounds.p_max,
            FrameSlot::Quarklet(qi) => self.bounds.admits(qi.degree(), qi.wavelet()),
        };
        if !in_bounds {
            return Err(Error::OutOfBounds(
                slot.to_string(),
                self.bounds.j_max,
                self.bounds.p_max,
            ));
        }
        if value == 0.0 {
            self.entries.remove(&slot);
        } else {
            self.entries.insert(slot, value);
        }
        Ok(())
    }

    pub fn value(&self, slot: &FrameSlot) -> f64 {
        self.entries.get(slot).copied().unwrap_or(0.0)
    }

    pub fn generator_value(&self, degree: u32) -> f64 {
        self.value(&FrameSlot::generator(degree))
    }

    pub fn node_value(&self, degree: u32, space: WaveletIndex) -> f64 {
        self.value(&FrameSlot::quarklet(degree, space))
    }

    /// Support iteration in canonical `(level, translation, degree)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&FrameSlot, f64)> {
        self.entries.iter().map(|(s, v)| (s, *v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of squared coefficients over the whole support.
    pub fn total_mass(&self) -> f64 {
        self.entries.values().map(|c| c * c).sum()
    }

    /// Keeps only the slots present in `tree` (including the generator slots
    /// up to the root degree); everything else becomes zero.
    pub fn restricted_to(&self, tree: &crate::tree::QuarkletTree) -> CoefficientSequence {
        let mut out = CoefficientSequence::new(self.bounds);
        for node in tree.base().nodes() {
            let degree = tree.induced_degree(node).expect("node is in the tree");
            for p in 0..=degree.min(self.bounds.p_max) {
                let slot = FrameSlot::quarklet(p, *node);
                let v = self.value(&slot);
                if v != 0.0 {
                    out.set(slot, v).expect("slot within bounds");
                }
                if node.is_root() {
                    let gen = FrameSlot::generator(p);
                    let v = self.value(&gen);
                    if v != 0.0 {
                        out.set(gen, v).expect("slot within bounds");
                    }
                }
            }
        }
        out
    }

    /// Serialises as `p,j,k,c` lines; generator slots use `j = -1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (slot, value) in self.iter() {
            let (j, k) = match slot {
                FrameSlot::Generator { .. } => (-1i64, 0u64),
                FrameSlot::Quarklet(qi) => (qi.wavelet().level() as i64, qi.wavelet().translation()),
            };
            writeln!(out, "{},{},{},{}", slot.degree(), j, k, value).expect("string write");
        }
        out
    }

    /// Parses `p,j,k,c` lines, sizing the bounds from the rows themselves.
    pub fn from_csv_inferred(text: &str) -> Result<Self> {
        let mut j_max = 0u32;
        let mut p_max = 0u32;
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() == 4 {
                if let (Ok(p), Ok(j)) = (
                    fields[0].trim().parse::<i64>(),
                    fields[1].trim().parse::<i64>(),
                ) {
                    if p >= 0 {
                        p_max = p_max.max(p as u32);
                    }
                    if j >= 0 {
                        j_max = j_max.max(j as u32);
                    }
                }
            }
        }
        Self::from_csv(text, Bounds::new(j_max, p_max)?)
    }

    /// Parses `p,j,k,c` lines produced by [`CoefficientSequence::to_csv`].
    /// Rows with `j = -1` address the root generator slots.
    pub fn from_csv(text: &str, bounds: Bounds) -> Result<Self> {
        let mut seq = CoefficientSequence::new(bounds);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::MalformedCsv {
                    line: lineno + 1,
                    reason: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let parse = |what: &str, s: &str| -> Result<i64> {
                s.trim().parse::<i64>().map_err(|e| Error::MalformedCsv {
                    line: lineno + 1,
                    reason: format!("bad {what} `{s}`: {e}"),
                })
            };
            let p = parse("degree", fields[0])?;
            let j = parse("level", fields[1])?;
            let k = parse("translation", fields[2])?;
            let c: f64 = fields[3].trim().parse().map_err(|e| Error::MalformedCsv {
                line: lineno + 1,
                reason: format!("bad coefficient `{}`: {e}", fields[3]),
            })?;
            if p < 0 || k < 0 {
                return Err(Error::MalformedCsv {
                    line: lineno + 1,
                    reason: "degree and translation must be nonnegative".into(),
                });
            }
            let slot = if j == -1 {
                if k != 0 {
                    return Err(Error::MalformedCsv {
                        line: lineno + 1,
                        reason: "generator rows must have k = 0".into(),
                    });
                }
                FrameSlot::generator(p as u32)
            } else if j >= 0 {
                let idx = WaveletIndex::new(j as u32, k as u64)?;
                FrameSlot::quarklet(p as u32, idx)
            } else {
                return Err(Error::MalformedCsv {
                    line: lineno + 1,
                    reason: format!("level {j} below -1"),
                });
            };
            seq.set(slot, c)?;
        }
        Ok(seq)
    }
}
