//! Problem instances for one-bit compressed sensing: sparse signal and
//! Gaussian sensing matrix generation, sign quantization, and the JSON
//! instance file format.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Fixed offsets mixed into an instance's master seed so that the signal and
// matrix draws come from independent sub-streams.
const MATRIX_STREAM_OFFSET: u64 = 0x6d61_7472_6978; // "matrix"
const SIGNAL_STREAM_OFFSET: u64 = 0x7369_676e_616c; // "signal"

/// SplitMix64 finalizer. Bijective on u64, so distinct inputs always yield
/// distinct derived seeds.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn substream(seed: u64, offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed.wrapping_add(offset)))
}

/// A K-sparse ground-truth signal with known support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    coefficients: Array1<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    /// Builds a signal from a dense coefficient vector; the support is the
    /// set of nonzero entries.
    pub fn from_coefficients(coefficients: Array1<f64>) -> Self {
        let support = coefficients
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, _)| i)
            .collect();
        SparseSignal {
            coefficients,
            support,
        }
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    /// Number of nonzero coefficients (K).
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn coefficients(&self) -> &Array1<f64> {
        &self.coefficients
    }

    /// Indices of the nonzero coefficients, sorted ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }
}

/// Draws a K-sparse signal: the support is a uniform K-subset of `[0, n)`
/// and the nonzero coefficients are independent standard normal draws.
pub fn generate_sparse_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    if n == 0 {
        return Err(Error::invalid("signal dimension n must be positive"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "sparsity K must satisfy 1 <= K <= n, got K={k}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support = rand::seq::index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut coefficients = Array1::zeros(n);
    for &i in &support {
        let mut c: f64 = rng.sample(StandardNormal);
        while c == 0.0 {
            c = rng.sample(StandardNormal);
        }
        coefficients[i] = c;
    }
    Ok(SparseSignal {
        coefficients,
        support,
    })
}

/// Dense m-by-n sensing matrix. Generated matrices have unit-norm columns;
/// matrices loaded from files may hold arbitrary entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    entries: Array2<f64>,
}

impl SensingMatrix {
    /// Wraps externally supplied entries without renormalizing them.
    pub fn from_entries(entries: Array2<f64>) -> Self {
        SensingMatrix { entries }
    }

    /// Number of measurements (rows).
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    /// Ambient signal dimension (columns).
    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// Draws an m-by-n matrix of independent standard normal entries, then
/// scales each column to unit Euclidean norm.
pub fn generate_sensing_matrix(m: usize, n: usize, seed: u64) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!(
            "matrix dimensions must be positive, got m={m}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Array2::from_shape_fn((m, n), |_| rng.sample::<f64, _>(StandardNormal));
    for j in 0..n {
        let mut col = entries.column_mut(j);
        let mut norm = col.dot(&col).sqrt();
        while norm == 0.0 {
            // vanishingly unlikely, but the unit-norm invariant is hard
            for v in col.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            norm = col.dot(&col).sqrt();
        }
        col.mapv_inplace(|v| v / norm);
    }
    Ok(SensingMatrix::from_entries(entries))
}

/// One-bit measurement outcomes, one sign per matrix row.
#[derive(Debug, Clone, PartialEq)]
pub struct SignVector {
    bits: Vec<i8>,
}

impl SignVector {
    /// Validates that every entry is exactly +1 or -1.
    pub fn from_bits(bits: Vec<i8>) -> Result<Self> {
        if let Some(i) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::invalid(format!(
                "sign vector entry {i} is {}, expected +1 or -1",
                bits[i]
            )));
        }
        Ok(SignVector { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    /// The signs as a float vector, for use in margin arithmetic.
    pub fn to_f64(&self) -> Array1<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

/// Applies the element-wise sign function to the measurements `A x`.
/// Zero maps to -1: the sign function returns +1 for strictly positive
/// values and -1 otherwise.
pub fn quantize(matrix: &SensingMatrix, x: &ArrayView1<f64>) -> Result<SignVector> {
    if x.len() != matrix.n() {
        return Err(Error::invalid(format!(
            "quantize: x has length {}, expected n={}",
            x.len(),
            matrix.n()
        )));
    }
    let bits = matrix
        .entries
        .dot(x)
        .iter()
        .map(|&y| if y > 0.0 { 1i8 } else { -1i8 })
        .collect();
    Ok(SignVector { bits })
}

/// A sensing matrix paired with its observed sign vector, optionally
/// carrying the ground truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub matrix: SensingMatrix,
    pub signs: SignVector,
    pub truth: Option<SparseSignal>,
    pub seed: u64,
}

impl ProblemInstance {
    /// Validates the cross-field invariants: sign count matches m, truth
    /// dimension matches n, and the truth reproduces the stored signs.
    pub fn new(
        matrix: SensingMatrix,
        signs: SignVector,
        truth: Option<SparseSignal>,
        seed: u64,
    ) -> Result<Self> {
        if signs.len() != matrix.m() {
            return Err(Error::invalid(format!(
                "sign vector length {} does not match matrix row count {}",
                signs.len(),
                matrix.m()
            )));
        }
        if let Some(t) = &truth {
            if t.n() != matrix.n() {
                return Err(Error::invalid(format!(
                    "truth dimension {} does not match matrix column count {}",
                    t.n(),
                    matrix.n()
                )));
            }
            let requantized = quantize(&matrix, &t.coefficients().view())?;
            if requantized != signs {
                return Err(Error::invalid(
                    "stored signs are inconsistent with quantize(matrix, truth)",
                ));
            }
        }
        Ok(ProblemInstance {
            matrix,
            signs,
            truth,
            seed,
        })
    }

    /// Generates a full instance from one master seed: signal and matrix
    /// come from sub-streams at fixed offsets, then the signal is quantized.
    pub fn generate(m: usize, n: usize, k: usize, seed: u64) -> Result<Self> {
        let matrix = {
            let mut rng = substream(seed, MATRIX_STREAM_OFFSET);
            generate_sensing_matrix(m, n, rng.random())?
        };
        let truth = {
            let mut rng = substream(seed, SIGNAL_STREAM_OFFSET);
            generate_sparse_signal(n, k, rng.random())?
        };
        let signs = quantize(&matrix, &truth.coefficients().view())?;
        Ok(ProblemInstance {
            matrix,
            signs,
            truth: Some(truth),
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.matrix.m()
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Serializes to the instance file schema as a single JSON document.
    pub fn to_json_string(&self) -> String {
        let file = InstanceFile {
            m: self.m(),
            n: self.n(),
            matrix: self.matrix.entries.iter().copied().collect(),
            signs: self.signs.bits.clone(),
            truth: self.truth.as_ref().map(|t| TruthFile {
                coefficients: t.coefficients().to_vec(),
                support: t.support().to_vec(),
            }),
            seed: self.seed,
        };
        serde_json::to_string(&file).expect("instance serialization cannot fail")
    }

    /// Parses and validates an instance from its JSON document form.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| Error::parse("document", e.to_string()))?;
        if file.m == 0 {
            return Err(Error::parse("m", "m must be a positive integer"));
        }
        if file.n == 0 {
            return Err(Error::parse("n", "n must be a positive integer"));
        }
        if file.matrix.len() != file.m * file.n {
            return Err(Error::parse(
                "matrix",
                format!(
                    "expected {} entries (m*n), found {}",
                    file.m * file.n,
                    file.matrix.len()
                ),
            ));
        }
        if file.signs.len() != file.m {
            return Err(Error::parse(
                "signs",
                format!("expected m={} signs, found {}", file.m, file.signs.len()),
            ));
        }
        if let Some(i) = file.signs.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::parse(
                "signs",
                format!("entry {i} is {}, expected +1 or -1", file.signs[i]),
            ));
        }
        let entries = Array2::from_shape_vec((file.m, file.n), file.matrix)
            .expect("length checked above");
        let matrix = SensingMatrix::from_entries(entries);
        let signs = SignVector {
            bits: file.signs,
        };
        let truth = match file.truth {
            None => None,
            Some(t) => {
                if t.coefficients.len() != file.n {
                    return Err(Error::parse(
                        "truth.coefficients",
                        format!(
                            "expected n={} coefficients, found {}",
                            file.n,
                            t.coefficients.len()
                        ),
                    ));
                }
                let signal = SparseSignal::from_coefficients(Array1::from_vec(t.coefficients));
                if signal.support() != t.support.as_slice() {
                    return Err(Error::parse(
                        "truth.support",
                        "support does not equal the set of nonzero coefficient indices",
                    ));
                }
                Some(signal)
            }
        };
        ProblemInstance::new(matrix, signs, truth, file.seed).map_err(|e| match e {
            Error::InvalidArgument(reason) => Error::parse("signs", reason),
            other => other,
        })
    }
}

/// Writes an instance to `path` in the JSON instance format.
pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instance.to_json_string())?;
    Ok(())
}

/// Reads and validates an instance file written by [`save_instance`].
pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)?;
    ProblemInstance::from_json_str(&text)
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    n: usize,
    matrix: Vec<f64>,
    signs: Vec<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<TruthFile>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct TruthFile {
    coefficients: Vec<f64>,
    support: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn full_support_when_k_equals_n() {
        let s = generate_sparse_signal(5, 5, 42).unwrap();
        assert_eq!(s.support(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn sparsity_counts_are_exact() {
        let s = generate_sparse_signal(50, 3, 7).unwrap();
        assert_eq!(s.sparsity(), 3);
        let zeros = s.coefficients().iter().filter(|&&c| c == 0.0).count();
        assert_eq!(zeros, 47);
        for &i in s.support() {
            assert_ne!(s.coefficients()[i], 0.0);
        }
    }

    #[test]
    fn invalid_sparsity_is_rejected() {
        assert!(matches!(
            generate_sparse_signal(5, 0, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            generate_sparse_signal(5, 6, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            generate_sensing_matrix(0, 5, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            generate_sensing_matrix(5, 0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn support_is_uniform_over_indices() {
        // 10_000 draws with n=10, K=1: each index should be hit with
        // frequency 0.1 +/- 0.01.
        let mut counts = [0usize; 10];
        for trial in 0..10_000u64 {
            let s = generate_sparse_signal(10, 1, 1000 + trial).unwrap();
            counts[s.support()[0]] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / 10_000.0;
            assert!(
                (freq - 0.1).abs() <= 0.01,
                "index {i} frequency {freq} outside 0.1 +/- 0.01"
            );
        }
    }

    #[test]
    fn columns_have_unit_norm() {
        let a = generate_sensing_matrix(3, 4, 9).unwrap();
        for j in 0..4 {
            let col = a.entries().column(j);
            assert!((col.dot(&col).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_by_one_matrix_is_a_sign() {
        let a = generate_sensing_matrix(1, 1, 3).unwrap();
        assert!((a.entries()[[0, 0]].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entry_mean_is_near_zero() {
        let a = generate_sensing_matrix(100, 50, 2024).unwrap();
        let mean = a.entries().iter().sum::<f64>() / 5000.0;
        assert!(mean.abs() < 0.02, "entry mean {mean}");
    }

    #[test]
    fn generation_is_deterministic() {
        let a = ProblemInstance::generate(20, 10, 3, 99).unwrap();
        let b = ProblemInstance::generate(20, 10, 3, 99).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        let c = ProblemInstance::generate(20, 10, 3, 100).unwrap();
        assert_ne!(a.to_json_string(), c.to_json_string());
    }

    #[test]
    fn quantize_identity_matrix() {
        let matrix = SensingMatrix::from_entries(array![[1.0, 0.0], [0.0, 1.0]]);
        let bits = quantize(&matrix, &array![3.0, -2.0].view()).unwrap();
        assert_eq!(bits.bits(), &[1, -1]);
    }

    #[test]
    fn quantize_maps_zero_to_minus_one() {
        let matrix = SensingMatrix::from_entries(array![[1.0]]);
        let bits = quantize(&matrix, &array![0.0].view()).unwrap();
        assert_eq!(bits.bits(), &[-1]);
    }

    #[test]
    fn quantize_rejects_dimension_mismatch() {
        let matrix = SensingMatrix::from_entries(array![[1.0, 0.0]]);
        assert!(matches!(
            quantize(&matrix, &array![1.0].view()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn generated_truth_reproduces_signs() {
        let inst = ProblemInstance::generate(30, 12, 4, 5).unwrap();
        let truth = inst.truth.as_ref().unwrap();
        let requantized = quantize(&inst.matrix, &truth.coefficients().view()).unwrap();
        assert_eq!(requantized, inst.signs);
    }

    #[test]
    fn round_trip_preserves_every_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        let inst = ProblemInstance::generate(3, 4, 2, 31).unwrap();
        save_instance(&inst, &path).unwrap();
        let loaded = load_instance(&path).unwrap();
        assert_eq!(inst.matrix.entries(), loaded.matrix.entries());
        assert_eq!(inst.signs, loaded.signs);
        assert_eq!(inst.truth, loaded.truth);
        assert_eq!(inst.seed, loaded.seed);
    }

    #[test]
    fn load_rejects_zero_sign() {
        let text = r#"{"m":2,"n":1,"matrix":[1.0,-1.0],"signs":[1,0],"seed":1}"#;
        match ProblemInstance::from_json_str(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "signs"),
            other => panic!("expected parse error on signs, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_sign_count_mismatch() {
        let text = r#"{"m":2,"n":1,"matrix":[1.0,-1.0],"signs":[1],"seed":1}"#;
        match ProblemInstance::from_json_str(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "signs"),
            other => panic!("expected parse error on signs, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_truth_sign_inconsistency() {
        // signs say -1 but the truth produces +1 through a positive matrix
        let text = r#"{"m":1,"n":1,"matrix":[1.0],"signs":[-1],"truth":{"coefficients":[2.0],"support":[0]},"seed":1}"#;
        match ProblemInstance::from_json_str(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "signs"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_bad_support() {
        let text = r#"{"m":1,"n":2,"matrix":[1.0,0.0],"signs":[1],"truth":{"coefficients":[2.0,0.0],"support":[1]},"seed":1}"#;
        match ProblemInstance::from_json_str(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "truth.support"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn quantize_is_scale_invariant(
            seed in 0u64..1_000,
            scale in 1e-4f64..1e4,
        ) {
            let inst = ProblemInstance::generate(12, 6, 2, seed).unwrap();
            let x = inst.truth.as_ref().unwrap().coefficients().clone();
            let scaled = x.mapv(|v| v * scale);
            let q1 = quantize(&inst.matrix, &x.view()).unwrap();
            let q2 = quantize(&inst.matrix, &scaled.view()).unwrap();
            prop_assert_eq!(q1.bits(), q2.bits());
        }

        #[test]
        fn quantize_outputs_only_signs(seed in 0u64..1_000) {
            let inst = ProblemInstance::generate(8, 5, 3, seed).unwrap();
            prop_assert!(inst.signs.bits().iter().all(|&b| b == 1 || b == -1));
        }
    }
}
