//! Ordered-statistics stability ranking.
//!
//! Each vertex is tested against eight descriptor criteria. A criterion that
//! holds contributes its rate times the normalized magnitude of the quantity
//! it tests; the sum is the vertex's stability score. Vertices are then
//! sorted by decreasing score (ties by ascending index) into the parallel
//! vectors `s` (scores) and `q` (vertex indices), and the first `L` entries
//! of `q` become watermark hosts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{vertex_features, AreaScheme, VertexFeatures};
use crate::mesh::{
    build_adjacency, validate_topology, AdjacencyIndex, Mesh, DEFAULT_FLAT_ANGLE_TOL,
};
use crate::neuro::{self, NetworkParams};

/// The eight assessment criteria in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    /// ψ_min ≥ 0
    PsiMinNonNegative,
    /// θ < 2π
    ThetaBelowFull,
    /// κ_G1 > 0
    QuadricCurvaturePositive,
    /// ψ_max ≥ 0
    PsiMaxNonNegative,
    /// θ > 2π
    ThetaAboveFull,
    /// κ_G < 0
    DeficitCurvatureNegative,
    /// κ_G1 < 0
    QuadricCurvatureNegative,
    /// κ_G > 0
    DeficitCurvaturePositive,
}

/// The descriptor quantity a criterion's magnitude is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    PsiMin,
    PsiMax,
    ThetaDeviation,
    KappaG,
    KappaG1,
}

const QUANTITIES: [Quantity; 5] = [
    Quantity::PsiMin,
    Quantity::PsiMax,
    Quantity::ThetaDeviation,
    Quantity::KappaG,
    Quantity::KappaG1,
];

impl Quantity {
    fn value(self, f: &VertexFeatures) -> f64 {
        match self {
            Quantity::PsiMin => f.psi_min,
            Quantity::PsiMax => f.psi_max,
            Quantity::ThetaDeviation => f.theta - 2.0 * PI,
            Quantity::KappaG => f.kappa_g,
            Quantity::KappaG1 => f.kappa_g1,
        }
    }

    fn slot(self) -> usize {
        QUANTITIES.iter().position(|&q| q == self).unwrap()
    }
}

impl CriterionId {
    pub const ALL: [CriterionId; 8] = [
        CriterionId::PsiMinNonNegative,
        CriterionId::ThetaBelowFull,
        CriterionId::QuadricCurvaturePositive,
        CriterionId::PsiMaxNonNegative,
        CriterionId::ThetaAboveFull,
        CriterionId::DeficitCurvatureNegative,
        CriterionId::QuadricCurvatureNegative,
        CriterionId::DeficitCurvaturePositive,
    ];

    /// Default rate for the criterion.
    pub fn default_rate(self) -> f64 {
        match self {
            CriterionId::PsiMinNonNegative => 1.0,
            CriterionId::ThetaBelowFull => 1.0,
            CriterionId::QuadricCurvaturePositive => 1.0,
            CriterionId::PsiMaxNonNegative => 0.9,
            CriterionId::ThetaAboveFull => 0.8,
            CriterionId::DeficitCurvatureNegative => 0.8,
            CriterionId::QuadricCurvatureNegative => 0.7,
            CriterionId::DeficitCurvaturePositive => 0.4,
        }
    }

    fn quantity(self) -> Quantity {
        match self {
            CriterionId::PsiMinNonNegative => Quantity::PsiMin,
            CriterionId::PsiMaxNonNegative => Quantity::PsiMax,
            CriterionId::ThetaBelowFull | CriterionId::ThetaAboveFull => Quantity::ThetaDeviation,
            CriterionId::DeficitCurvatureNegative | CriterionId::DeficitCurvaturePositive => {
                Quantity::KappaG
            }
            CriterionId::QuadricCurvaturePositive | CriterionId::QuadricCurvatureNegative => {
                Quantity::KappaG1
            }
        }
    }

    pub fn holds(self, f: &VertexFeatures) -> bool {
        match self {
            CriterionId::PsiMinNonNegative => f.psi_min >= 0.0,
            CriterionId::ThetaBelowFull => f.theta < 2.0 * PI,
            CriterionId::QuadricCurvaturePositive => f.kappa_g1 > 0.0,
            CriterionId::PsiMaxNonNegative => f.psi_max >= 0.0,
            CriterionId::ThetaAboveFull => f.theta > 2.0 * PI,
            CriterionId::DeficitCurvatureNegative => f.kappa_g < 0.0,
            CriterionId::QuadricCurvatureNegative => f.kappa_g1 < 0.0,
            CriterionId::DeficitCurvaturePositive => f.kappa_g > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: CriterionId,
    pub rate: f64,
    #[serde(default = "default_true")]
    pub enabled: bool,
}

fn default_true() -> bool {
    true
}

/// Which risky primitives are kept out of the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Exclusions {
    pub boundary: bool,
    pub isolated: bool,
    pub flat_region: bool,
    pub collinear_chain: bool,
}

impl Default for Exclusions {
    fn default() -> Self {
        Self {
            boundary: true,
            isolated: true,
            flat_region: true,
            collinear_chain: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub exclude: Exclusions,
    /// Percentile used as the robust maximum when normalizing magnitudes.
    #[serde(default = "default_percentile")]
    pub normalization_percentile: f64,
}

fn default_percentile() -> f64 {
    0.99
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            criteria: CriterionId::ALL
                .iter()
                .map(|&id| Criterion {
                    id,
                    rate: id.default_rate(),
                    enabled: true,
                })
                .collect(),
            exclude: Exclusions::default(),
            normalization_percentile: default_percentile(),
        }
    }
}

impl CriterionConfig {
    pub fn rates(&self) -> Vec<f64> {
        self.criteria.iter().map(|c| c.rate).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if let Some(c) = cfg.criteria.iter().find(|c| !(0.0..=1.0).contains(&c.rate)) {
            return Err(Error::InvalidArgument(format!(
                "rate {} for {:?} outside [0, 1]",
                c.rate, c.id
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RiskFlags {
    pub isolated: bool,
    pub boundary: bool,
    pub flat_region: bool,
    pub collinear_chain: bool,
}

/// One row of the feature table. `features` is `None` when the vertex is
/// unscorable (isolated, degenerate, no interior edge, failed fit).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub index: usize,
    pub features: Option<VertexFeatures>,
    pub risk: RiskFlags,
}

impl FeatureRecord {
    fn usable(&self, exclude: &Exclusions) -> Option<&VertexFeatures> {
        let r = &self.risk;
        let excluded = (exclude.isolated && r.isolated)
            || (exclude.boundary && r.boundary)
            || (exclude.flat_region && r.flat_region)
            || (exclude.collinear_chain && r.collinear_chain);
        if excluded {
            None
        } else {
            self.features.as_ref()
        }
    }
}

pub fn compute_feature_table(mesh: &Mesh, adj: &AdjacencyIndex) -> Vec<FeatureRecord> {
    let topo = validate_topology(mesh, adj, DEFAULT_FLAT_ANGLE_TOL);
    (0..mesh.vertex_count())
        .into_par_iter()
        .map(|i| {
            let risk = RiskFlags {
                isolated: topo.isolated_vertices.contains(&i),
                boundary: topo.boundary_vertices.contains(&i),
                flat_region: topo.flat_region_vertices.contains(&i),
                collinear_chain: topo.collinear_chain_vertices.contains(&i),
            };
            let features = if risk.isolated {
                None
            } else {
                vertex_features(mesh, adj, i, AreaScheme::Mixed).ok()
            };
            FeatureRecord {
                index: i,
                features,
                risk,
            }
        })
        .collect()
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-vertex vectors of gated, normalized criterion magnitudes, in the
/// order of `config.criteria`. `None` marks vertices that are unscorable or
/// excluded. These vectors are both the weighted-sum score's terms and the
/// scoring network's input.
pub fn criterion_inputs(
    records: &[FeatureRecord],
    config: &CriterionConfig,
) -> Result<Vec<Option<Vec<f64>>>> {
    if records.is_empty() {
        return Err(Error::EmptyFeatureTable);
    }
    let usable: Vec<Option<&VertexFeatures>> =
        records.iter().map(|r| r.usable(&config.exclude)).collect();
    let mut scales = [0.0; 5];
    for q in QUANTITIES {
        let mut mags: Vec<f64> = usable.iter().flatten().map(|f| q.value(f).abs()).collect();
        mags.sort_by(f64::total_cmp);
        let mut scale = percentile(&mags, config.normalization_percentile);
        if scale <= 0.0 {
            scale = mags.last().copied().unwrap_or(0.0);
        }
        scales[q.slot()] = scale;
    }
    Ok(usable
        .iter()
        .map(|f| {
            f.map(|f| {
                config
                    .criteria
                    .iter()
                    .map(|c| {
                        if !c.enabled || !c.id.holds(f) {
                            return 0.0;
                        }
                        let q = c.id.quantity();
                        let scale = scales[q.slot()];
                        if scale > 0.0 {
                            (q.value(f).abs() / scale).min(1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
        })
        .collect())
}

/// Rate-weighted sum of gated normalized magnitudes; `-inf` for unscorable
/// or excluded vertices.
pub fn score_vertices(records: &[FeatureRecord], config: &CriterionConfig) -> Result<Vec<f64>> {
    let inputs = criterion_inputs(records, config)?;
    Ok(inputs
        .iter()
        .map(|inp| match inp {
            Some(v) => v
                .iter()
                .zip(&config.criteria)
                .map(|(x, c)| c.rate * x)
                .sum(),
            None => f64::NEG_INFINITY,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRanking {
    /// Scores, non-increasing.
    pub s: Vec<f64>,
    /// Vertex indices parallel to `s`.
    pub q: Vec<usize>,
}

impl StabilityRanking {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// Sort descending by score, ties by ascending index; `-inf` entries dropped.
pub fn rank_vertices(scores: &[f64]) -> Result<StabilityRanking> {
    let mut order: Vec<usize> = (0..scores.len())
        .filter(|&i| scores[i].is_finite())
        .collect();
    if order.is_empty() {
        return Err(Error::AllExcluded);
    }
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(StabilityRanking {
        s: order.iter().map(|&i| scores[i]).collect(),
        q: order,
    })
}

pub fn select_hosts(ranking: &StabilityRanking, count: usize) -> Result<Vec<usize>> {
    if count > ranking.q.len() {
        return Err(Error::InsufficientStableVertices {
            requested: count,
            available: ranking.q.len(),
        });
    }
    Ok(ranking.q[..count].to_vec())
}

/// How vertex stability scores are produced.
#[derive(Debug, Clone)]
pub enum Scorer {
    /// Fixed criterion rates.
    Osveta(CriterionConfig),
    /// Trained network over the same criterion inputs.
    Neuro {
        params: NetworkParams,
        criteria: CriterionConfig,
    },
    /// Seeded uniform shuffle of every vertex; the baseline.
    Random { seed: u64 },
}

impl Scorer {
    pub fn name(&self) -> &'static str {
        match self {
            Scorer::Osveta(_) => "osveta",
            Scorer::Neuro { .. } => "neuro",
            Scorer::Random { .. } => "random",
        }
    }

    pub fn scores(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        match self {
            Scorer::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..mesh.vertex_count())
                    .map(|_| rng.random::<f64>())
                    .collect())
            }
            Scorer::Osveta(cfg) => {
                let adj = build_adjacency(mesh);
                score_vertices(&compute_feature_table(mesh, &adj), cfg)
            }
            Scorer::Neuro { params, criteria } => {
                let adj = build_adjacency(mesh);
                neuro::score_vertices_nn(params, &compute_feature_table(mesh, &adj), criteria)
            }
        }
    }

    pub fn rank(&self, mesh: &Mesh) -> Result<StabilityRanking> {
        rank_vertices(&self.scores(mesh)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Point;
    use crate::shapes;
    use proptest::prelude::*;

    fn feat(kappa_g: f64, kappa_g1: f64, theta: f64, psi_min: f64, psi_max: f64) -> VertexFeatures {
        VertexFeatures {
            kappa_g,
            kappa_g1,
            theta,
            psi_min,
            psi_max,
            area: 1.0,
            normal: Point::z(),
            valence: 6,
        }
    }

    fn record(i: usize, f: VertexFeatures) -> FeatureRecord {
        FeatureRecord {
            index: i,
            features: Some(f),
            risk: RiskFlags::default(),
        }
    }

    #[test]
    fn default_rates_match_table() {
        assert_eq!(
            CriterionConfig::default().rates(),
            vec![1.0, 1.0, 1.0, 0.9, 0.8, 0.8, 0.7, 0.4]
        );
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = CriterionConfig::default();
        assert_eq!(CriterionConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let bad = cfg.to_json().replace("0.9", "1.9");
        assert!(CriterionConfig::from_json(&bad).is_err());
    }

    #[test]
    fn no_predicate_scores_zero() {
        // Concave flat-angle vertex: only θ > 2π style criteria could fire,
        // but θ = 2π exactly, κ = 0, and dihedrals negative.
        let recs = vec![
            record(0, feat(0.0, 0.0, 2.0 * PI, -0.1, -0.05)),
            record(1, feat(1.0, 1.0, 5.0, 0.1, 0.2)),
        ];
        let s = score_vertices(&recs, &CriterionConfig::default()).unwrap();
        assert_eq!(s[0], 0.0);
    }

    #[test]
    fn percentile_endpoint_scores_rate() {
        // Only criterion 1 can hold for vertex 0 (psi_min >= 0, other
        // quantities chosen so no other predicate holds).
        let mut cfg = CriterionConfig::default();
        cfg.normalization_percentile = 1.0;
        let recs = vec![
            record(0, feat(0.0, 0.0, 2.0 * PI, 0.5, -0.0)),
            record(1, feat(0.0, 0.0, 2.0 * PI, 0.25, -0.1)),
        ];
        // psi_max = -0.0 satisfies ψ_max ≥ 0 with zero magnitude: adds nothing.
        let s = score_vertices(&recs, &cfg).unwrap();
        assert_eq!(s[0], 1.0);
        assert_eq!(s[1], 0.5);
    }

    /// Independent reimplementation of the scoring rule.
    fn oracle_scores(feats: &[VertexFeatures], rates: &[f64; 8], p: f64) -> Vec<f64> {
        let q = |f: &VertexFeatures, k: usize| -> f64 {
            [
                f.psi_min,
                f.theta - 2.0 * PI,
                f.kappa_g1,
                f.psi_max,
                f.theta - 2.0 * PI,
                f.kappa_g,
                f.kappa_g1,
                f.kappa_g,
            ][k]
        };
        let pred = |f: &VertexFeatures, k: usize| -> bool {
            [
                f.psi_min >= 0.0,
                f.theta < 2.0 * PI,
                f.kappa_g1 > 0.0,
                f.psi_max >= 0.0,
                f.theta > 2.0 * PI,
                f.kappa_g < 0.0,
                f.kappa_g1 < 0.0,
                f.kappa_g > 0.0,
            ][k]
        };
        let robust = |k: usize| {
            let mut m: Vec<f64> = feats.iter().map(|f| q(f, k).abs()).collect();
            m.sort_by(f64::total_cmp);
            let pos = p * (m.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            m[lo] + (m[hi] - m[lo]) * (pos - lo as f64)
        };
        feats
            .iter()
            .map(|f| {
                (0..8)
                    .filter(|&k| pred(f, k))
                    .map(|k| rates[k] * (q(f, k).abs() / robust(k)).min(1.0))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn hand_built_table_matches_oracle() {
        let feats = vec![
            feat(0.3, 0.25, 6.0, 0.1, 0.4),
            feat(-0.2, -0.1, 6.5, -0.3, 0.2),
            feat(1.5, 2.0, 5.2, 0.2, 0.9),
            feat(0.05, -0.02, 6.3, -0.05, 0.01),
            feat(-0.8, 0.4, 6.9, -0.6, -0.1),
        ];
        let recs: Vec<_> = feats
            .iter()
            .enumerate()
            .map(|(i, f)| record(i, *f))
            .collect();
        let cfg = CriterionConfig::default();
        let got = score_vertices(&recs, &cfg).unwrap();
        let want = oracle_scores(&feats, &[1.0, 1.0, 1.0, 0.9, 0.8, 0.8, 0.7, 0.4], 0.99);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn empty_table_errors() {
        assert!(matches!(
            score_vertices(&[], &CriterionConfig::default()),
            Err(Error::EmptyFeatureTable)
        ));
    }

    #[test]
    fn rank_tie_break() {
        let r = rank_vertices(&[0.2, 0.9, 0.9, f64::NEG_INFINITY]).unwrap();
        assert_eq!(r.q, vec![1, 2, 0]);
        assert_eq!(r.s, vec![0.9, 0.9, 0.2]);
        let r = rank_vertices(&[0.5; 6]).unwrap();
        assert_eq!(r.q, (0..6).collect::<Vec<_>>());
        assert!(matches!(
            rank_vertices(&[f64::NEG_INFINITY]),
            Err(Error::AllExcluded)
        ));
    }

    #[test]
    fn select_hosts_bounds() {
        let r = rank_vertices(&(0..1000).map(|i| (i % 37) as f64).collect::<Vec<_>>()).unwrap();
        assert_eq!(select_hosts(&r, 50).unwrap(), r.q[..50].to_vec());
        assert_eq!(select_hosts(&r, 1000).unwrap(), r.q);
        assert!(select_hosts(&r, 0).unwrap().is_empty());
        assert!(matches!(
            select_hosts(&r, 1001),
            Err(Error::InsufficientStableVertices {
                requested: 1001,
                available: 1000
            })
        ));
    }

    #[test]
    fn feature_table_cases() {
        let m = shapes::icosahedron(1.0);
        let t = compute_feature_table(&m, &build_adjacency(&m));
        assert_eq!(t.len(), 12);
        // Icosahedron: mixed area equals barycentric (equilateral faces).
        for r in &t {
            let f = r.features.unwrap();
            assert!((f.kappa_g - 1.45103).abs() < 1e-4, "{}", f.kappa_g);
        }

        let tri = shapes::single_triangle();
        let t = compute_feature_table(&tri, &build_adjacency(&tri));
        assert!(t.iter().all(|r| r.features.is_none()));

        let mut g = shapes::grid(5, 5, 1.0);
        g.vertices.push(Point::new(9.0, 9.0, 9.0));
        let t = compute_feature_table(&g, &build_adjacency(&g));
        assert!(t[25].risk.isolated && t[25].features.is_none());
    }

    #[test]
    fn pyramid_apex_ranks_first() {
        let (m, apex) = shapes::pyramid_grid(9, 1.5);
        let r = Scorer::Osveta(CriterionConfig::default()).rank(&m).unwrap();
        assert_eq!(r.q[0], apex);
    }

    fn rotate(m: &Mesh, axis: Point, angle: f64, shift: Point) -> Mesh {
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        Mesh {
            vertices: m.vertices.iter().map(|v| rot * v + shift).collect(),
            faces: m.faces.clone(),
        }
    }

    #[test]
    fn ranking_is_rigid_invariant() {
        let m = shapes::bumpy_sphere(1.0, 3, 12, 3);
        let cfg = CriterionConfig::default();
        let a = Scorer::Osveta(cfg.clone()).rank(&m).unwrap();
        let moved = rotate(
            &m,
            Point::new(0.3, -1.0, 0.5),
            0.7,
            Point::new(4.0, -2.0, 1.0),
        );
        let b = Scorer::Osveta(cfg).rank(&moved).unwrap();
        assert_eq!(a.q.len(), b.q.len());
        for (k, (&x, &y)) in a.q.iter().zip(&b.q).enumerate() {
            if x != y {
                // Only near-ties may swap.
                assert!((a.s[k] - b.s[k]).abs() < 1e-6, "rank {k}: {x} vs {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn rank_matches_argsort(scores in proptest::collection::vec(-5.0f64..5.0, 1..200)) {
            let r = rank_vertices(&scores).unwrap();
            let mut idx: Vec<usize> = (0..scores.len()).collect();
            idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
            prop_assert_eq!(&r.q, &idx);
            prop_assert!(r.s.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn raising_a_rate_never_lowers_a_satisfying_vertex(k in 0usize..8, bump in 0.0f64..0.5) {
            let feats = [
                feat(0.3, 0.25, 6.0, 0.1, 0.4),
                feat(-0.2, -0.1, 6.5, -0.3, 0.2),
                feat(1.5, 2.0, 5.2, 0.2, 0.9),
            ];
            let recs: Vec<_> = feats.iter().enumerate().map(|(i, f)| record(i, *f)).collect();
            let base = CriterionConfig::default();
            let mut raised = base.clone();
            raised.criteria[k].rate = (raised.criteria[k].rate + bump).min(1.0);
            let s0 = score_vertices(&recs, &base).unwrap();
            let s1 = score_vertices(&recs, &raised).unwrap();
            for i in 0..3 {
                if base.criteria[k].id.holds(&feats[i]) {
                    prop_assert!(s1[i] >= s0[i]);
                }
            }
        }
    }
}
