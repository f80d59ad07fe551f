//! Regular quasi-cyclic LDPC codes with systematic encoding and Gallager-B
//! hard-decision decoding.

use serde::Serialize;

use crate::error::{Error, Result};

/// Block rows of the base matrix.
const BASE_ROWS: usize = 4;
/// Block columns of the base matrix.
const BASE_COLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpcCode {
    pub n: usize,
    pub k: usize,
    pub circulant_size: usize,
    pub d_v: usize,
    pub row_weight: usize,
    /// Column indices of the ones in each parity check.
    pub checks: Vec<Vec<usize>>,
    /// Check indices covering each codeword bit.
    pub vars: Vec<Vec<usize>>,
    /// Codeword positions carrying message bits, in message order.
    pub info_positions: Vec<usize>,
    /// For each parity position, the info positions it is the XOR of.
    parity_rules: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeOutcome {
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
    /// True iff the final codeword has an all-zero syndrome.
    pub converged: bool,
    pub iterations: usize,
}

fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidArgument("bit values must be 0 or 1".into()));
    }
    Ok(())
}

/// Number of block-level 4-cycles the block (r, c) with `shift` would close
/// against the already assigned `shifts`.
fn cycles_closed(
    shifts: &[[Option<usize>; BASE_COLS]; BASE_ROWS],
    r: usize,
    c: usize,
    shift: usize,
    z: usize,
) -> usize {
    let mut count = 0;
    for r2 in 0..BASE_ROWS {
        if r2 == r {
            continue;
        }
        for c2 in 0..BASE_COLS {
            if c2 == c {
                continue;
            }
            if let (Some(a), Some(b), Some(d)) = (shifts[r][c2], shifts[r2][c], shifts[r2][c2]) {
                if (shift + z - a + d + z - b) % z == 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

impl LdpcCode {
    /// (3,6)-regular code from a 4×8 grid of `z`×`z` circulant permutation
    /// blocks. Block column `c` has its zero block in block row `c mod 4`.
    /// Shifts are chosen block by block to close as few 4-cycles as
    /// possible, smallest shift first on ties.
    pub fn quasi_cyclic(z: usize) -> Result<Self> {
        if z == 0 {
            return Err(Error::CodeConstruction(
                "circulant size must be positive".into(),
            ));
        }
        let mut shifts = [[None; BASE_COLS]; BASE_ROWS];
        for c in 0..BASE_COLS {
            for r in 0..BASE_ROWS {
                if r == c % BASE_ROWS {
                    continue;
                }
                let best = (0..z)
                    .min_by_key(|&s| (cycles_closed(&shifts, r, c, s, z), s))
                    .expect("z > 0");
                shifts[r][c] = Some(best);
            }
        }
        let n = BASE_COLS * z;
        let mut checks = vec![Vec::new(); BASE_ROWS * z];
        for (r, row) in shifts.iter().enumerate() {
            for (c, s) in row.iter().enumerate() {
                if let Some(s) = s {
                    for i in 0..z {
                        checks[r * z + i].push(c * z + (i + s) % z);
                    }
                }
            }
        }
        for row in &mut checks {
            row.sort_unstable();
        }
        let mut code = Self::from_checks(n, checks)?;
        code.circulant_size = z;
        Ok(code)
    }

    /// Smallest quasi-cyclic code whose message length holds `payload_bits`.
    pub fn for_payload(payload_bits: usize) -> Result<Self> {
        if payload_bits == 0 {
            return Err(Error::InvalidArgument("payload is empty".into()));
        }
        let mut z = 1;
        loop {
            let code = Self::quasi_cyclic(z)?;
            if code.k >= payload_bits {
                return Ok(code);
            }
            z += 1;
        }
    }

    /// Builds a code from its parity checks. The code must be regular.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut vars = vec![Vec::new(); n];
        for (i, row) in checks.iter().enumerate() {
            for &c in row {
                if c >= n {
                    return Err(Error::CodeConstruction(format!(
                        "check {i} references column {c} >= n = {n}"
                    )));
                }
                vars[c].push(i);
            }
        }
        let d_v = vars.first().map_or(0, Vec::len);
        let row_weight = checks.first().map_or(0, Vec::len);
        if vars.iter().any(|v| v.len() != d_v) || checks.iter().any(|r| r.len() != row_weight) {
            return Err(Error::CodeConstruction(
                "parity-check matrix is not regular".into(),
            ));
        }
        let (info_positions, parity_rules) = systematic_form(n, &checks);
        if info_positions.is_empty() {
            return Err(Error::CodeConstruction(
                "parity-check matrix has full column rank".into(),
            ));
        }
        Ok(Self {
            n,
            k: info_positions.len(),
            circulant_size: 0,
            d_v,
            row_weight,
            checks,
            vars,
            info_positions,
            parity_rules,
        })
    }

    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.checks
            .iter()
            .map(|row| row.iter().fold(0, |acc, &c| acc ^ word[c]))
            .collect()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n && self.syndrome(word).iter().all(|&s| s == 0)
    }

    /// Number of 4-cycles in the Tanner graph: for every pair of checks,
    /// the number of column pairs they share.
    pub fn four_cycles(&self) -> usize {
        let mut count = 0;
        for a in 0..self.checks.len() {
            for b in a + 1..self.checks.len() {
                let shared = self.checks[a]
                    .iter()
                    .filter(|c| self.checks[b].binary_search(c).is_ok())
                    .count();
                count += shared * shared.saturating_sub(1) / 2;
            }
        }
        count
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k {
            return Err(Error::SizeMismatch {
                expected: self.k,
                found: message.len(),
            });
        }
        check_bits(message)?;
        let mut word = vec![0u8; self.n];
        for (&pos, &bit) in self.info_positions.iter().zip(message) {
            word[pos] = bit;
        }
        for (pos, sources) in &self.parity_rules {
            word[*pos] = sources.iter().fold(0, |acc, &s| acc ^ word[s]);
        }
        Ok(word)
    }

    pub fn message_of(&self, word: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| word[p]).collect()
    }

    /// Gallager-B message passing on hard bits. A bit overrides its channel
    /// value toward a check when a majority of its other checks disagree
    /// with the channel; the final decision is a majority over the channel
    /// value and every check, ties keeping the channel value.
    pub fn decode(&self, hard_bits: &[u8], max_iters: usize) -> Result<DecodeOutcome> {
        if hard_bits.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: hard_bits.len(),
            });
        }
        check_bits(hard_bits)?;
        let mut word = hard_bits.to_vec();
        let finish = |word: Vec<u8>, iterations| {
            let converged = self.is_codeword(&word);
            DecodeOutcome {
                message: self.message_of(&word),
                codeword: word,
                converged,
                iterations,
            }
        };
        if self.is_codeword(&word) {
            return Ok(finish(word, 0));
        }
        let threshold = self.flip_threshold();
        // var_to_check[v][j]: message from bit v to its j-th check.
        let mut var_to_check: Vec<Vec<u8>> = self
            .vars
            .iter()
            .zip(hard_bits)
            .map(|(cs, &y)| vec![y; cs.len()])
            .collect();
        let mut check_to_var: Vec<Vec<u8>> = self.checks.iter().map(|r| vec![0; r.len()]).collect();
        for iter in 1..=max_iters {
            for (i, row) in self.checks.iter().enumerate() {
                let total = row
                    .iter()
                    .fold(0, |acc, &v| acc ^ var_to_check[v][self.slot(v, i)]);
                for (j, &v) in row.iter().enumerate() {
                    check_to_var[i][j] = total ^ var_to_check[v][self.slot(v, i)];
                }
            }
            for v in 0..self.n {
                let y = hard_bits[v];
                let incoming: Vec<u8> = self.vars[v]
                    .iter()
                    .map(|&i| check_to_var[i][self.check_slot(i, v)])
                    .collect();
                let disagree = incoming.iter().filter(|&&m| m != y).count();
                for (j, &m) in incoming.iter().enumerate() {
                    let others = disagree - (m != y) as usize;
                    var_to_check[v][j] = if others >= threshold { 1 - y } else { y };
                }
                word[v] = if 2 * disagree > self.d_v + 1 {
                    1 - y
                } else {
                    y
                };
            }
            if self.is_codeword(&word) {
                return Ok(finish(word, iter));
            }
        }
        Ok(finish(word, max_iters))
    }

    fn flip_threshold(&self) -> usize {
        (self.d_v.saturating_sub(1) / 2 + 1).max(1)
    }

    fn slot(&self, v: usize, check: usize) -> usize {
        self.vars[v]
            .iter()
            .position(|&c| c == check)
            .expect("edge exists")
    }

    fn check_slot(&self, check: usize, v: usize) -> usize {
        self.checks[check].binary_search(&v).expect("edge exists")
    }
}

/// Gauss–Jordan elimination over GF(2). Returns the free (message) columns
/// and, for each pivot column, the free columns it is the parity of.
fn systematic_form(n: usize, checks: &[Vec<usize>]) -> (Vec<usize>, Vec<(usize, Vec<usize>)>) {
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = checks
        .iter()
        .map(|r| {
            let mut w = vec![0u64; words];
            for &c in r {
                w[c / 64] ^= 1 << (c % 64);
            }
            w
        })
        .collect();
    let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], c)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && bit(row, c) {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    let info: Vec<usize> = (0..n)
        .filter(|c| pivots.binary_search(c).is_err())
        .collect();
    let rules = pivots
        .iter()
        .enumerate()
        .map(|(r, &p)| {
            (
                p,
                info.iter().copied().filter(|&c| bit(&rows[r], c)).collect(),
            )
        })
        .collect();
    (info, rules)
}
