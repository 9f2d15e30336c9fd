//! Dressed states of the three-level rotating-frame Hamiltonian and the
//! secular partition of the lowering operator into per-line operators.
//!
//! Dressed states are labelled |−⟩, |+̃⟩, |ẽ⟩ (indices 0, 1, 2). At the
//! two-photon resonance these carry the eigenfrequencies
//! `0`, `(−√(α²+12Ω²) − α)/4` and `(+√(α²+12Ω²) − α)/4`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{check_square, hermiticity_deviation, max_abs, ComplexMatrix};
use crate::lindblad::DensityMatrix;

/// Label index of |−⟩.
pub const MINUS: usize = 0;
/// Label index of |+̃⟩.
pub const PLUS: usize = 1;
/// Label index of |ẽ⟩.
pub const E_TILDE: usize = 2;

const TRACKING_STEPS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DressedBasis {
    /// Eigenfrequencies in label order (|−⟩, |+̃⟩, |ẽ⟩), rad/s.
    pub eigenvalues: [f64; 3],
    /// Columns are the dressed states expressed in the bare basis.
    pub vectors: ComplexMatrix,
}

impl DressedBasis {
    /// `c_ij` with |i⟩ = Σ_j c_ij |ξ_j⟩, i.e. `c_ij = ⟨ξ_j|i⟩`.
    pub fn coefficient(&self, bare: usize, dressed: usize) -> Complex64 {
        self.vectors[(bare, dressed)].conj()
    }

    /// Operator expressed in the dressed basis: V† X V.
    pub fn to_dressed(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint() * x * &self.vectors
    }

    pub fn to_bare(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.vectors * x * self.vectors.adjoint()
    }

    /// ⟨ξ_j|ρ|ξ_j⟩ in label order.
    pub fn populations(&self, rho: &DensityMatrix) -> [f64; 3] {
        let d = self.to_dressed(rho.matrix());
        [d[(0, 0)].re, d[(1, 1)].re, d[(2, 2)].re]
    }

    /// V Λ V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            self.eigenvalues.iter().map(|&l| Complex64::from(l)),
        ));
        self.to_bare(&lambda)
    }
}

/// Closed-form dressed frequencies at δ = 0, in label order.
pub fn resonant_dressed_frequencies(alpha: f64, omega: f64) -> [f64; 3] {
    let root = (alpha * alpha + 12.0 * omega * omega).sqrt();
    [0.0, (-root - alpha) / 4.0, (root - alpha) / 4.0]
}

/// Diagonalizes a 3×3 rotating-frame Hamiltonian and labels the eigenstates.
///
/// Labels are fixed at the point where the |g⟩ and |f⟩ diagonal entries
/// coincide (two-photon resonance), where |−⟩ is the dark state
/// ∝ (H_ef, 0, −H_eg) that decouples from |e⟩, and |ẽ⟩ is the state with the
/// largest |e⟩ weight. They are then carried to the actual Hamiltonian by
/// maximum-overlap tracking along the straight path in the |f⟩ diagonal entry.
/// Each eigenvector is rephased so that its largest-magnitude component is
/// real and positive.
pub fn diagonalize(h3: &ComplexMatrix) -> Result<DressedBasis> {
    check_square(h3, 3)?;
    let scale = max_abs(h3);
    let deviation = hermiticity_deviation(h3);
    if deviation > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation });
    }
    let h3 = (h3 + h3.adjoint()) * Complex64::from(0.5);

    let shift = h3[(2, 2)].re - h3[(0, 0)].re;
    let at = |s: f64| {
        let mut h = h3.clone();
        h[(2, 2)] -= Complex64::from((1.0 - s) * shift);
        h
    };

    let mut current = labelled_start(&at(0.0), scale);
    if shift != 0.0 {
        for step in 1..=TRACKING_STEPS {
            let s = step as f64 / TRACKING_STEPS as f64;
            let next = eigh(&at(s));
            current = match_by_overlap(&current, &next);
        }
    }

    let mut vectors = current;
    for j in 0..3 {
        fix_phase(&mut vectors, j);
    }
    let eigenvalues = [0, 1, 2].map(|j| {
        let v = vectors.column(j);
        (v.adjoint() * &h3 * v)[(0, 0)].re
    });
    Ok(DressedBasis {
        eigenvalues,
        vectors,
    })
}

fn eigh(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(h.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn labelled_start(h: &ComplexMatrix, scale: f64) -> ComplexMatrix {
    let (vals, vecs) = eigh(h);
    let e_idx = (0..3)
        .max_by(|&a, &b| {
            vecs[(1, a)]
                .norm()
                .partial_cmp(&vecs[(1, b)].norm())
                .unwrap()
        })
        .unwrap();
    let others: Vec<usize> = (0..3).filter(|&j| j != e_idx).collect();

    // Dark direction in the g/f plane: the combination whose coupling to |e⟩ cancels.
    let (ceg, cef) = (h[(1, 0)], h[(1, 2)]);
    let mut dark = nalgebra::DVector::from_vec(vec![cef, Complex64::from(0.0), -ceg]);
    if dark.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        // Undriven limit of the drive convention i(Ω/2)(b − b†).
        dark = nalgebra::DVector::from_vec(vec![
            Complex64::from(2f64.sqrt()),
            Complex64::from(0.0),
            Complex64::from(1.0),
        ]);
    }
    dark /= Complex64::from(dark.norm());

    let mut out = ComplexMatrix::zeros(3, 3);
    out.set_column(E_TILDE, &vecs.column(e_idx));
    let gap = (vals[others[0]] - vals[others[1]]).abs();
    if gap <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        // Degenerate pair: build |−⟩ inside the pair's span directly.
        let p0 = vecs.column(others[0]).clone_owned();
        let p1 = vecs.column(others[1]).clone_owned();
        let mut minus = &p0 * p0.dotc(&dark) + &p1 * p1.dotc(&dark);
        minus /= Complex64::from(minus.norm());
        let mut plus = &p0 - &minus * minus.dotc(&p0);
        if plus.norm() < 1e-6 {
            plus = &p1 - &minus * minus.dotc(&p1);
        }
        plus /= Complex64::from(plus.norm());
        out.set_column(MINUS, &minus);
        out.set_column(PLUS, &plus);
    } else {
        let overlap = |j: usize| vecs.column(j).dotc(&dark).norm();
        let (m, p) = if overlap(others[0]) >= overlap(others[1]) {
            (others[0], others[1])
        } else {
            (others[1], others[0])
        };
        out.set_column(MINUS, &vecs.column(m));
        out.set_column(PLUS, &vecs.column(p));
    }
    out
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn match_by_overlap(prev: &ComplexMatrix, next: &(Vec<f64>, ComplexMatrix)) -> ComplexMatrix {
    let vecs = &next.1;
    let overlap = |label: usize, j: usize| prev.column(label).dotc(&vecs.column(j)).norm_sqr();
    let best = PERMUTATIONS
        .iter()
        .max_by(|a, b| {
            let sa: f64 = (0..3).map(|l| overlap(l, a[l])).sum();
            let sb: f64 = (0..3).map(|l| overlap(l, b[l])).sum();
            sa.partial_cmp(&sb).unwrap()
        })
        .unwrap();
    let mut out = ComplexMatrix::zeros(3, 3);
    for (label, &idx) in best.iter().enumerate() {
        let mut col = vecs.column(idx).clone_owned();
        // keep phase continuous along the path
        let ov = prev.column(label).dotc(&col);
        if ov.norm() > 0.0 {
            col *= ov.conj() / ov.norm();
        }
        out.set_column(label, &col);
    }
    out
}

fn fix_phase(vectors: &mut ComplexMatrix, j: usize) {
    let mut col = vectors.column(j).clone_owned();
    let k = (0..col.len())
        .max_by(|&a, &b| col[a].norm().partial_cmp(&col[b].norm()).unwrap())
        .unwrap();
    let phase = col[k] / col[k].norm();
    col /= phase;
    col[k] = Complex64::from(col[k].re);
    vectors.set_column(j, &col);
}

/// Spectral line selector. `Full` denotes the undecomposed lowering operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Line {
    Full,
    Tprf,
    Ge,
    Ef,
}

impl Line {
    pub const SECULAR: [Line; 3] = [Line::Tprf, Line::Ge, Line::Ef];

    /// Centre of the Bohr-frequency group relative to the drive.
    pub fn center(self, alpha: f64) -> f64 {
        match self {
            Line::Full | Line::Tprf => 0.0,
            Line::Ge => -alpha / 2.0,
            Line::Ef => alpha / 2.0,
        }
    }
}

impl std::fmt::Display for Line {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Line::Full => "FULL",
            Line::Tprf => "TPRF",
            Line::Ge => "GE",
            Line::Ef => "EF",
        };
        f.write_str(s)
    }
}

/// The part of the lowering operator emitting around one line centre.
#[derive(Clone, Debug, PartialEq)]
pub struct LineOperator {
    pub label: Line,
    pub center_frequency: f64,
    /// Matrix in the dressed basis.
    pub dressed: ComplexMatrix,
    /// Same operator in the bare basis.
    pub bare: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineDecomposition {
    pub tprf: LineOperator,
    pub ge: LineOperator,
    pub ef: LineOperator,
}

impl LineDecomposition {
    pub fn get(&self, line: Line) -> Option<&LineOperator> {
        match line {
            Line::Tprf => Some(&self.tprf),
            Line::Ge => Some(&self.ge),
            Line::Ef => Some(&self.ef),
            Line::Full => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &LineOperator> {
        [&self.tprf, &self.ge, &self.ef].into_iter()
    }

    pub fn sum_bare(&self) -> ComplexMatrix {
        &self.tprf.bare + &self.ge.bare + &self.ef.bare
    }
}

pub fn default_grouping_tolerance(alpha: f64) -> f64 {
    alpha.abs() / 4.0
}

/// Assigns each dressed-basis term ⟨ξ_j|b|ξ_k⟩ |ξ_j⟩⟨ξ_k| to the line whose
/// centre is nearest to its Bohr frequency λ_k − λ_j.
pub fn decompose(
    b: &ComplexMatrix,
    basis: &DressedBasis,
    alpha: f64,
    grouping_tolerance: f64,
) -> Result<LineDecomposition> {
    if b.nrows() != 3 {
        return Err(Error::DecompositionLevels(b.nrows()));
    }
    check_square(b, 3)?;
    let bd = basis.to_dressed(b);
    let negligible = 1e-14 * max_abs(b).max(f64::MIN_POSITIVE);
    let mut parts = [
        ComplexMatrix::zeros(3, 3),
        ComplexMatrix::zeros(3, 3),
        ComplexMatrix::zeros(3, 3),
    ];
    for j in 0..3 {
        for k in 0..3 {
            let amp = bd[(j, k)];
            let bohr = basis.eigenvalues[k] - basis.eigenvalues[j];
            let (slot, distance) = Line::SECULAR
                .iter()
                .enumerate()
                .map(|(i, l)| (i, (bohr - l.center(alpha)).abs()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if amp.norm() > negligible && distance > grouping_tolerance {
                return Err(Error::AmbiguousGrouping {
                    row: j,
                    col: k,
                    bohr,
                    distance,
                    tolerance: grouping_tolerance,
                });
            }
            parts[slot][(j, k)] = amp;
        }
    }
    let [t, ge, ef] = parts;
    let make = |label: Line, dressed: ComplexMatrix| LineOperator {
        label,
        center_frequency: label.center(alpha),
        bare: basis.to_bare(&dressed),
        dressed,
    };
    Ok(LineDecomposition {
        tprf: make(Line::Tprf, t),
        ge: make(Line::Ge, ge),
        ef: make(Line::Ef, ef),
    })
}
