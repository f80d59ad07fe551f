//! Run-length channel symbols. Symbol `i` (counted from 1) becomes a run of
//! ones when `i` is odd and zeros when even; the run has length 2 for
//! symbol 0 and 3 for symbol 1.

use crate::error::{Error, Result};

/// Channel value for a bit that could not be read. Strict decoding rejects
/// it; tolerant decoding lets it match either polarity for free.
pub const ERASURE: u8 = 2;

fn polarity(index: usize) -> u8 {
    // Zero-based index: even positions are the odd-numbered symbols.
    (index % 2 == 0) as u8
}

fn run_length(symbol: u8) -> usize {
    if symbol == 0 {
        2
    } else {
        3
    }
}

pub fn rll_encode(symbols: &[u8]) -> Vec<u8> {
    symbols
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| std::iter::repeat_n(polarity(i), run_length(s)))
        .collect()
}

/// Maximal runs as (bit, start, length).
fn runs(bits: &[u8]) -> Vec<(u8, usize, usize)> {
    let mut out: Vec<(u8, usize, usize)> = Vec::new();
    for (i, &b) in bits.iter().enumerate() {
        match out.last_mut() {
            Some((v, _, len)) if *v == b => *len += 1,
            _ => out.push((b, i, 1)),
        }
    }
    out
}

fn symbol_of_run(index: usize, bit: u8, start: usize, len: usize) -> Result<u8> {
    if bit == ERASURE {
        return Err(Error::MalformedRun {
            position: start,
            reason: "erased bit".into(),
        });
    }
    if bit != polarity(index) {
        return Err(Error::MalformedRun {
            position: start,
            reason: format!("run {} should be {}s", index + 1, polarity(index)),
        });
    }
    match len {
        2 => Ok(0),
        3 => Ok(1),
        _ => Err(Error::MalformedRun {
            position: start,
            reason: format!("run of length {len}"),
        }),
    }
}

/// Exact inverse of [`rll_encode`].
pub fn rll_decode(bits: &[u8]) -> Result<Vec<u8>> {
    runs(bits)
        .into_iter()
        .enumerate()
        .map(|(i, (b, start, len))| symbol_of_run(i, b, start, len))
        .collect()
}

/// Decodes the first `count` runs of a stream in which they are followed by
/// at least one delimiting bit of the opposite value; anything after the
/// delimiter is ignored.
pub fn rll_decode_prefix(bits: &[u8], count: usize) -> Result<Vec<u8>> {
    let r = runs(bits);
    if r.len() <= count {
        return Err(Error::MalformedRun {
            position: bits.len(),
            reason: format!("stream ends after {} of {count} runs", r.len().min(count)),
        });
    }
    r.into_iter()
        .take(count)
        .enumerate()
        .map(|(i, (b, start, len))| symbol_of_run(i, b, start, len))
        .collect()
}

/// Minimum-Hamming-distance segmentation of the stream into `count` runs of
/// length 2 or 3 followed by a delimiter bit. Returns the symbols and the
/// number of channel bits that disagree with the chosen segmentation.
pub fn rll_decode_tolerant(bits: &[u8], count: usize) -> Result<(Vec<u8>, usize)> {
    if bits.len() < 2 * count + 1 {
        return Err(Error::MalformedRun {
            position: bits.len(),
            reason: format!("{} channel bits cannot hold {count} runs", bits.len()),
        });
    }
    const INF: usize = usize::MAX / 2;
    let width = bits.len() + 1;
    // cost[j][p]: best cost of j runs covering bits[..p].
    let mut cost = vec![INF; (count + 1) * width];
    let mut choice = vec![0u8; (count + 1) * width];
    cost[0] = 0;
    for j in 0..count {
        let pol = polarity(j);
        for p in 0..width {
            let base = cost[j * width + p];
            if base == INF {
                continue;
            }
            for symbol in [0u8, 1] {
                let len = run_length(symbol);
                if p + len > bits.len() {
                    continue;
                }
                let c = base
                    + bits[p..p + len]
                        .iter()
                        .filter(|&&b| b != pol && b != ERASURE)
                        .count();
                let slot = (j + 1) * width + p + len;
                if c < cost[slot] {
                    cost[slot] = c;
                    choice[slot] = symbol;
                }
            }
        }
    }
    let last_pol = polarity(count.saturating_sub(1));
    let (best_end, best_cost) = (0..bits.len())
        .filter(|&p| cost[count * width + p] < INF)
        .map(|p| {
            let delimiter = if count == 0 {
                0
            } else {
                (bits[p] == last_pol) as usize
            };
            (p, cost[count * width + p] + delimiter)
        })
        .min_by_key(|&(p, c)| (c, p))
        .expect("length check guarantees a segmentation");
    let mut symbols = vec![0u8; count];
    let mut p = best_end;
    for j in (0..count).rev() {
        let s = choice[(j + 1) * width + p];
        symbols[j] = s;
        p -= run_length(s);
    }
    Ok((symbols, best_cost))
}
