//! Framed holomorphic bundles through their Tyurin data: the degeneration
//! divisor `D = gamma_1 + ... + gamma_{gl}` and a projective kernel vector
//! `alpha_i` at each point. The bundle is never materialized as transition
//! functions; sections are handled through the vector-function dictionary
//! `S(P) = Psi(P) f(P)` evaluated on samples.

use crate::curve::{CurveModel, CurvePoint};
use crate::error::{KnError, Result};
use crate::field::C64;
use crate::linalg::{det, inverse, Mat};
use crate::meromorphic::MeromorphicFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct FramedBundleData {
    pub rank: usize,
    /// Degeneration points; `g * rank` of them (empty at genus zero).
    pub points: Vec<C64>,
    /// Projective Tyurin vectors, stored with the first coordinate of
    /// magnitude above threshold normalized to one.
    pub alphas: Vec<Vec<C64>>,
    pub seed: u64,
}

/// A vector-valued function in the bundle model: component functions plus
/// cached residue vectors at the degeneration points.
#[derive(Clone, Debug)]
pub struct KNVectorFunction {
    pub components: Vec<MeromorphicFunction>,
    /// `residues[i]` is the residue vector at `gamma_i`.
    pub residues: Vec<Vec<C64>>,
}

fn normalize_projective(v: &mut [C64]) -> Result<()> {
    let lead = v
        .iter()
        .find(|x| x.norm() > 1e-9)
        .copied()
        .ok_or(KnError::NonGenericData("zero Tyurin vector".into()))?;
    for x in v.iter_mut() {
        *x /= lead;
    }
    Ok(())
}

/// Deterministic random bundle: `g * l` distinct points in the fundamental
/// cell away from the marked points, one nonzero projective vector each.
pub fn random_framed_bundle(curve: &CurveModel, l: usize, seed: u64) -> Result<FramedBundleData> {
    if l < 1 {
        return Err(KnError::Config("rank must be at least 1".into()));
    }
    let count = curve.genus() as usize * l;
    if count == 0 {
        return Ok(FramedBundleData {
            rank: l,
            points: Vec::new(),
            alphas: Vec::new(),
            seed,
        });
    }
    let lattice = curve.lattice()?;
    let (p_plus, p_minus) = (
        curve.p_plus().as_torus()?,
        curve.p_minus().as_torus()?,
    );
    let scale = lattice.omega1.norm().min(lattice.omega2.norm());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points: Vec<C64> = Vec::new();
    let mut guard = 0;
    while points.len() < count {
        guard += 1;
        if guard > 10_000 {
            return Err(KnError::NonGenericData("could not place divisor points".into()));
        }
        let t: f64 = rng.gen_range(0.05..0.95);
        let s: f64 = rng.gen_range(0.05..0.95);
        let z = lattice.omega1 * t + lattice.omega2 * s;
        let ok = lattice.torus_distance(z, p_plus) > 0.02 * scale
            && lattice.torus_distance(z, p_minus) > 0.02 * scale
            && points
                .iter()
                .all(|&p| lattice.torus_distance(z, p) > 0.02 * scale);
        if ok {
            points.push(z);
        }
    }
    let mut alphas = Vec::with_capacity(count);
    for _ in 0..count {
        loop {
            let mut v: Vec<C64> = (0..l)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            if v[0].norm() < 0.2 {
                continue; // keep the projective normalization well conditioned
            }
            normalize_projective(&mut v)?;
            alphas.push(v);
            break;
        }
    }
    Ok(FramedBundleData {
        rank: l,
        points,
        alphas,
        seed,
    })
}

/// Residue proportionality `res_{gamma_i} f || alpha_i` at every point,
/// tested through the antisymmetric cross products.
pub fn check_tyurin_constraints(
    f: &KNVectorFunction,
    bundle: &FramedBundleData,
    tol: f64,
) -> bool {
    max_tyurin_violation(f, bundle).map_or(false, |v| v <= tol)
}

/// Largest normalized cross-product `res_j alpha_k - res_k alpha_j` over all
/// points and component pairs.
pub fn max_tyurin_violation(f: &KNVectorFunction, bundle: &FramedBundleData) -> Option<f64> {
    if f.residues.len() != bundle.points.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (res, alpha) in f.residues.iter().zip(&bundle.alphas) {
        if res.len() != bundle.rank || alpha.len() != bundle.rank {
            return None;
        }
        let rnorm: f64 = res.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let anorm: f64 = alpha.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let scale = (rnorm * anorm).max(1.0);
        for j in 0..bundle.rank {
            for k in (j + 1)..bundle.rank {
                let cross = res[j] * alpha[k] - res[k] * alpha[j];
                worst = worst.max(cross.norm() / scale);
            }
        }
    }
    Some(worst)
}

/// Right action of `gamma` on the framing: `Psi -> Psi gamma` sends the
/// kernel vectors to `gamma^{-1} alpha`, re-normalized projectively.
pub fn apply_framing_change(
    bundle: &FramedBundleData,
    gamma: &Mat<C64>,
) -> Result<FramedBundleData> {
    if gamma.rows != bundle.rank || gamma.cols != bundle.rank {
        return Err(KnError::ShapeMismatch(format!(
            "gamma is {}x{}, bundle rank {}",
            gamma.rows, gamma.cols, bundle.rank
        )));
    }
    if det(gamma).norm() < 1e-12 {
        return Err(KnError::SingularFraming);
    }
    let ginv = inverse(gamma, 1e-12).map_err(|_| KnError::SingularFraming)?;
    let mut alphas = Vec::with_capacity(bundle.alphas.len());
    for a in &bundle.alphas {
        let mut v = ginv.matvec(a);
        normalize_projective(&mut v)?;
        alphas.push(v);
    }
    Ok(FramedBundleData {
        rank: bundle.rank,
        points: bundle.points.clone(),
        alphas,
        seed: bundle.seed,
    })
}

/// `S(P) = Psi(P) f(P)` on sample points.
pub fn section_from_vector_function(
    f_values: &[Vec<C64>],
    psi_samples: &[Mat<C64>],
) -> Result<Vec<Vec<C64>>> {
    if f_values.len() != psi_samples.len() {
        return Err(KnError::ShapeMismatch("sample count mismatch".into()));
    }
    f_values
        .iter()
        .zip(psi_samples)
        .map(|(f, psi)| {
            if psi.cols != f.len() {
                return Err(KnError::ShapeMismatch("rank mismatch in samples".into()));
            }
            Ok(psi.matvec(f))
        })
        .collect()
}

/// Inverse dictionary: `f(P) = Psi(P)^{-1} S(P)`; rejects samples on the
/// degeneration divisor where the framing matrix degenerates.
pub fn vector_function_from_section(
    s_values: &[Vec<C64>],
    psi_samples: &[Mat<C64>],
) -> Result<Vec<Vec<C64>>> {
    if s_values.len() != psi_samples.len() {
        return Err(KnError::ShapeMismatch("sample count mismatch".into()));
    }
    s_values
        .iter()
        .zip(psi_samples)
        .map(|(s, psi)| {
            if det(psi).norm() < 1e-10 {
                return Err(KnError::SampleOnDivisor);
            }
            crate::linalg::solve(psi, s, 1e-12).map_err(|_| KnError::SampleOnDivisor)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct BundleConfig {
    pub rank: usize,
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub alphas: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub seed: u64,
}

impl BundleConfig {
    pub fn to_data(&self) -> Result<FramedBundleData> {
        let mut alphas = Vec::new();
        for a in &self.alphas {
            let mut v: Vec<C64> = a.iter().map(|&[re, im]| C64::new(re, im)).collect();
            normalize_projective(&mut v)?;
            alphas.push(v);
        }
        Ok(FramedBundleData {
            rank: self.rank,
            points: self.points.iter().map(|&[re, im]| C64::new(re, im)).collect(),
            alphas,
            seed: self.seed,
        })
    }

    pub fn from_data(b: &FramedBundleData) -> Self {
        BundleConfig {
            rank: b.rank,
            points: b.points.iter().map(|p| [p.re, p.im]).collect(),
            alphas: b
                .alphas
                .iter()
                .map(|a| a.iter().map(|x| [x.re, x.im]).collect())
                .collect(),
            seed: b.seed,
        }
    }
}

/// Reads a bundle from JSON; `{"rank": l, "seed": n}` with no points asks
/// for a random bundle on the given curve.
pub fn bundle_from_json(curve: &CurveModel, text: &str) -> Result<FramedBundleData> {
    let cfg: BundleConfig =
        serde_json::from_str(text).map_err(|e| KnError::Config(format!("bundle config: {e}")))?;
    if cfg.points.is_empty() && curve.genus() > 0 {
        random_framed_bundle(curve, cfg.rank, cfg.seed)
    } else {
        let data = cfg.to_data()?;
        let want = curve.genus() as usize * data.rank;
        if data.points.len() != want || data.alphas.len() != want {
            return Err(KnError::Config(format!(
                "expected {want} degeneration points for rank {} at genus {}",
                data.rank,
                curve.genus()
            )));
        }
        Ok(data)
    }
}
