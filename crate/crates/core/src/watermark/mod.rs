//! Blind mesh watermarking: scrambled payload → LDPC codeword → run-length
//! channel bits → sparse QIM on the principal-axis coordinates of the most
//! stable vertices.
//!
//! The host set is the top of the stability ranking, recomputed on whatever
//! mesh is being read. A keyed hash of each host's vertex index picks its
//! group, so the order of hosts inside the ranking does not matter, only
//! which vertices make the cut, and a vertex entering or leaving the cut
//! disturbs a single group. Every group carries one channel bit through a
//! keyed unit projection vector.

pub mod dt;
pub mod ldpc;
pub mod qim;
pub mod rll;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{principal_axis, principal_axis_gap};
use crate::mesh::{Mesh, Point};
use crate::ranking::{select_hosts, Scorer, StabilityRanking};

pub use dt::{dt_forward, dt_inverse};
pub use ldpc::{DecodeOutcome, LdpcCode};
pub use qim::{detect_scalar, qim_detect, qim_embed, quantize};
pub use rll::{rll_decode, rll_decode_prefix, rll_decode_tolerant, rll_encode, ERASURE};

pub const KEY_FORMAT_VERSION: u32 = 1;

/// A group counts as settled once its projection is within this fraction of
/// delta of the wanted coset point.
const SETTLED_FRACTION: f64 = 0.125;
const MAX_EMBED_PASSES: usize = 32;
/// Embedding refuses meshes whose two largest coordinate variances are
/// closer than this, relative to the largest.
pub const MIN_AXIS_GAP: f64 = 1e-3;
/// First pass at which a mesh that already decodes correctly is accepted.
const LENIENT_AFTER: usize = 16;

/// How the quantization step is derived from the mesh being processed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaRule {
    /// `factor` times the bounding-box diagonal.
    BboxRelative {
        factor: f64,
    },
    Absolute {
        delta: f64,
    },
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::BboxRelative { factor: 0.002 }
    }
}

impl DeltaRule {
    pub fn resolve(&self, mesh: &Mesh) -> Result<f64> {
        let delta = match *self {
            DeltaRule::BboxRelative { factor } => factor * mesh.bbox_diagonal(),
            DeltaRule::Absolute { delta } => delta,
        };
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "quantization step resolves to {delta}"
            )));
        }
        Ok(delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QimConfig {
    pub delta: f64,
    pub group_size: usize,
    pub dither_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatermarkPayload {
    pub bits: Vec<u8>,
}

impl WatermarkPayload {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("payload is empty".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("payload bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!(
                    "payload character {other:?} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Everything extraction needs besides the mesh and the scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatermarkKey {
    pub format_version: u32,
    pub payload_bits: usize,
    pub dt_seed: u64,
    pub dither_seed: u64,
    pub delta: DeltaRule,
    pub group_size: usize,
    pub circulant_size: usize,
    pub decoder_iterations: usize,
}

impl WatermarkKey {
    /// Key with the smallest code that holds `payload_bits` and the default
    /// step rule.
    pub fn new(
        payload_bits: usize,
        group_size: usize,
        dt_seed: u64,
        dither_seed: u64,
    ) -> Result<Self> {
        let code = LdpcCode::for_payload(payload_bits)?;
        let key = Self {
            format_version: KEY_FORMAT_VERSION,
            payload_bits,
            dt_seed,
            dither_seed,
            delta: DeltaRule::default(),
            group_size,
            circulant_size: code.circulant_size,
            decoder_iterations: 50,
        };
        key.validate()?;
        Ok(key)
    }

    fn validate(&self) -> Result<()> {
        if self.group_size == 0 {
            return Err(Error::InvalidArgument(
                "group size must be at least 1".into(),
            ));
        }
        if self.payload_bits == 0 {
            return Err(Error::InvalidArgument("payload is empty".into()));
        }
        Ok(())
    }

    pub fn code(&self) -> Result<LdpcCode> {
        let code = LdpcCode::quasi_cyclic(self.circulant_size)?;
        if code.k < self.payload_bits {
            return Err(Error::CodeConstruction(format!(
                "code holds {} message bits, payload has {}",
                code.k, self.payload_bits
            )));
        }
        Ok(code)
    }

    /// Channel bits always occupy the longest possible run-length stream
    /// plus one delimiter, so the group count is known without the payload.
    pub fn group_count(&self, code: &LdpcCode) -> usize {
        3 * code.n + 1
    }

    pub fn host_count(&self, code: &LdpcCode) -> usize {
        self.group_count(code) * self.group_size
    }

    pub fn qim(&self, mesh: &Mesh) -> Result<QimConfig> {
        Ok(QimConfig {
            delta: self.delta.resolve(mesh)?,
            group_size: self.group_size,
            dither_seed: self.dither_seed,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let key: Self = serde_json::from_str(text)?;
        key.validate()?;
        Ok(key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serializes")
    }

    pub fn digest(&self) -> String {
        Sha256::digest(self.to_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Scrambles, encodes and run-length modulates the payload, then pads to
/// `group_count` bits with the complement of the final run.
pub fn channel_bits(
    payload: &WatermarkPayload,
    key: &WatermarkKey,
    code: &LdpcCode,
) -> Result<(Vec<u8>, usize)> {
    if payload.bits.len() != key.payload_bits {
        return Err(Error::SizeMismatch {
            expected: key.payload_bits,
            found: payload.bits.len(),
        });
    }
    let mut message = dt_forward(&payload.bits, key.dt_seed);
    message.resize(code.k, 0);
    let codeword = code.encode(&message)?;
    let mut bits = rll_encode(&codeword);
    let used = bits.len();
    let delimiter = 1 - bits[used - 1];
    bits.resize(key.group_count(code), delimiter);
    Ok((bits, used))
}

/// Per-vertex keyed values: a hash choosing the group and a projection
/// weight.
fn vertex_key(dither_seed: u64, vertex: usize) -> (u64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(dither_seed);
    rng.set_stream(vertex as u64);
    let order = rng.next_u64();
    let weight: f64 = StandardNormal.sample(&mut rng);
    (order, weight)
}

/// Host groups and their unit projection vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HostLayout {
    pub groups: Vec<Vec<usize>>,
    pub projections: Vec<Vec<f64>>,
}

impl HostLayout {
    /// Takes the top `group_count * L` ranked vertices as hosts.
    pub fn from_ranking(
        ranking: &StabilityRanking,
        key: &WatermarkKey,
        group_count: usize,
    ) -> Result<Self> {
        let required = group_count * key.group_size;
        let hosts = select_hosts(ranking, required).map_err(|_| Error::InsufficientHosts {
            required,
            available: ranking.len(),
        })?;
        Ok(Self::from_hosts(&hosts, key, group_count))
    }

    /// Bins an explicit host set into `group_count` groups by keyed hash.
    /// Group sizes average `L` but vary; the order of `hosts` is irrelevant.
    pub fn from_hosts(hosts: &[usize], key: &WatermarkKey, group_count: usize) -> Self {
        let mut groups = vec![Vec::new(); group_count];
        let mut weights = vec![Vec::new(); group_count];
        let mut sorted = hosts.to_vec();
        sorted.sort_unstable();
        for v in sorted {
            let (hash, w) = vertex_key(key.dither_seed, v);
            let g = (hash % group_count as u64) as usize;
            groups[g].push(v);
            weights[g].push(w);
        }
        let projections = weights
            .into_iter()
            .map(|w| {
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                w.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        Self {
            groups,
            projections,
        }
    }
}

/// Frame in which host scalars are read: principal axis, centroid, step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelFrame {
    pub axis: Point,
    pub centroid: Point,
    pub delta: f64,
}

impl ChannelFrame {
    pub fn of(mesh: &Mesh, key: &WatermarkKey) -> Result<Self> {
        Ok(Self {
            axis: principal_axis(mesh)?,
            centroid: mesh.centroid(),
            delta: key.delta.resolve(mesh)?,
        })
    }

    fn scalar(&self, p: &Point) -> f64 {
        (p - self.centroid).dot(&self.axis)
    }

    fn projection(&self, mesh: &Mesh, group: &[usize], weights: &[f64]) -> f64 {
        group
            .iter()
            .zip(weights)
            .map(|(&v, w)| w * self.scalar(&mesh.vertices[v]))
            .sum()
    }
}

/// Hard channel bits read from `mesh` through `layout` and `frame`. Empty
/// groups carry no information and read as [`ERASURE`].
pub fn detect_channel(mesh: &Mesh, layout: &HostLayout, frame: &ChannelFrame) -> Vec<u8> {
    layout
        .groups
        .iter()
        .zip(&layout.projections)
        .map(|(g, p)| {
            if g.is_empty() {
                ERASURE
            } else {
                detect_scalar(frame.projection(mesh, g, p), frame.delta).0
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedRecord {
    pub payload_bits: usize,
    pub codeword_bits: usize,
    pub channel_bits: usize,
    pub group_count: usize,
    pub group_size: usize,
    pub host_count: usize,
    pub delta: f64,
    pub passes: usize,
    /// Largest displacement norm of any group's hosts.
    pub max_group_distortion: f64,
    pub total_squared_distortion: f64,
    /// Groups whose bit lacked margin, or was wrong, when embedding stopped.
    pub unsettled_groups: usize,
    pub key_digest: String,
}

/// Embeds `payload` so that blind extraction with the same `scorer` and
/// `key` reads it back. Each pass re-ranks the current mesh exactly as the
/// extractor will and re-quantizes every group that does not already hold
/// its bit with margin. The loop ends when a pass changes nothing, or, from
/// pass 16 on, as soon as the mesh already decodes to the
/// payload; the record then counts the groups left unsettled.
pub fn embed_watermark(
    mesh: &Mesh,
    payload: &WatermarkPayload,
    scorer: &Scorer,
    key: &WatermarkKey,
) -> Result<(Mesh, EmbedRecord)> {
    let code = key.code()?;
    let (wanted, used) = channel_bits(payload, key, &code)?;
    let group_count = wanted.len();
    let mut out = mesh.clone();
    for pass in 0..=MAX_EMBED_PASSES {
        let ranking = scorer.rank(&out)?;
        let layout = HostLayout::from_ranking(&ranking, key, group_count)?;
        if pass == 0 {
            let gap = principal_axis_gap(mesh)?;
            if gap < MIN_AXIS_GAP {
                return Err(Error::AmbiguousAxis { gap });
            }
        }
        let frame = ChannelFrame::of(&out, key)?;
        let mut pending = Vec::new();
        for (g, ((group, weights), &bit)) in layout
            .groups
            .iter()
            .zip(&layout.projections)
            .zip(&wanted)
            .enumerate()
        {
            if group.is_empty() {
                continue;
            }
            let s = frame.projection(&out, group, weights);
            let (got, residual) = detect_scalar(s, frame.delta);
            if pass == 0 || got != bit || residual > SETTLED_FRACTION * frame.delta {
                pending.push((g, s));
            }
        }
        let done = pending.is_empty()
            || (pass >= LENIENT_AFTER && {
                let channel = detect_channel(&out, &layout, &frame);
                decode_channel(&channel, key, &code)
                    .is_ok_and(|ex| ex.converged && ex.payload == *payload)
            });
        if done {
            let mut record = embed_record(mesh, &out, &layout, key, &code, used, frame.delta, pass);
            record.unsettled_groups = pending.len();
            return Ok((out, record));
        }
        if pass == MAX_EMBED_PASSES {
            break;
        }
        for (g, s) in pending {
            let shift = quantize(s, wanted[g], frame.delta) - s;
            for (&v, w) in layout.groups[g].iter().zip(&layout.projections[g]) {
                out.vertices[v] += frame.axis * (shift * w);
            }
        }
    }
    Err(Error::UnstableEmbedding(MAX_EMBED_PASSES))
}

#[allow(clippy::too_many_arguments)]
fn embed_record(
    original: &Mesh,
    marked: &Mesh,
    layout: &HostLayout,
    key: &WatermarkKey,
    code: &LdpcCode,
    used: usize,
    delta: f64,
    passes: usize,
) -> EmbedRecord {
    let moved = |v: usize| (marked.vertices[v] - original.vertices[v]).norm_squared();
    let total = (0..original.vertex_count()).map(moved).sum();
    let max_group = layout
        .groups
        .iter()
        .map(|g| g.iter().map(|&v| moved(v)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    EmbedRecord {
        payload_bits: key.payload_bits,
        codeword_bits: code.n,
        channel_bits: used,
        group_count: layout.groups.len(),
        group_size: key.group_size,
        host_count: layout.groups.iter().map(Vec::len).sum(),
        delta,
        passes,
        max_group_distortion: max_group,
        total_squared_distortion: total,
        unsettled_groups: 0,
        key_digest: key.digest(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    pub payload: WatermarkPayload,
    /// LDPC decoder reached a zero syndrome.
    pub converged: bool,
    /// First malformed run when the channel stream was out of sync.
    pub desync_position: Option<usize>,
    /// Channel bits overruled by the tolerant run-length decoder.
    pub run_mismatches: usize,
    pub decoder_iterations: usize,
}

/// Blind extraction: re-rank `mesh` with `scorer`, regroup hosts, detect and
/// decode.
pub fn extract_watermark(mesh: &Mesh, scorer: &Scorer, key: &WatermarkKey) -> Result<Extraction> {
    let ranking = scorer.rank(mesh)?;
    let code = key.code()?;
    let layout = HostLayout::from_ranking(&ranking, key, key.group_count(&code))?;
    extract_with_layout(mesh, &layout, key)
}

/// Detects and decodes through a given host layout; the frame is still
/// derived from `mesh`.
pub fn extract_with_layout(
    mesh: &Mesh,
    layout: &HostLayout,
    key: &WatermarkKey,
) -> Result<Extraction> {
    let code = key.code()?;
    let frame = ChannelFrame::of(mesh, key)?;
    let channel = detect_channel(mesh, layout, &frame);
    decode_channel(&channel, key, &code)
}

pub fn decode_channel(channel: &[u8], key: &WatermarkKey, code: &LdpcCode) -> Result<Extraction> {
    let (symbols, desync_position, run_mismatches) = match rll_decode_prefix(channel, code.n) {
        Ok(symbols) => (symbols, None, 0),
        Err(Error::MalformedRun { position, .. }) => {
            let (symbols, cost) = rll_decode_tolerant(channel, code.n)?;
            (symbols, Some(position), cost)
        }
        Err(e) => return Err(e),
    };
    let outcome = code.decode(&symbols, key.decoder_iterations)?;
    let scrambled = &outcome.message[..key.payload_bits];
    Ok(Extraction {
        payload: WatermarkPayload {
            bits: dt_inverse(scrambled, key.dt_seed),
        },
        converged: outcome.converged,
        desync_position,
        run_mismatches,
        decoder_iterations: outcome.iterations,
    })
}

/// Fraction of differing bits; length differences count as errors.
pub fn bit_error_rate(sent: &[u8], received: &[u8]) -> f64 {
    let n = sent.len().max(received.len());
    if n == 0 {
        return 0.0;
    }
    let mismatched = sent.iter().zip(received).filter(|(a, b)| a != b).count()
        + sent.len().abs_diff(received.len());
    mismatched as f64 / n as f64
}
