use crate::coefficients::{ChartFunction, ChartRing, GaussianRational, MultiIndex};
use crate::error::{Error, Result};
use crate::weyl_forms::{forms, GradedElement, SymplecticFrame, TermKey};

/// Geometric input of the Fedosov construction on one chart.
///
/// * `christoffel[k][i][j]` = Γᵏ_ij of a torsion-free symplectic connection;
/// * `bundle[i]` = the N×N matrix (Γ_V)_i, so Γ_V = dxⁱ (Γ_V)_i;
/// * `omega_h` = Ω_ħ, a closed scalar two-form series starting at ħ¹.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGeometry {
    frame: SymplecticFrame,
    ring: ChartRing,
    matrix_size: usize,
    christoffel: Vec<Vec<Vec<ChartFunction>>>,
    bundle: Vec<Vec<Vec<ChartFunction>>>,
    omega_h: GradedElement,
}

impl ChartGeometry {
    /// Flat geometry: Γ = 0, Γ_V = 0, Ω_ħ = 0.
    pub fn flat(frame: SymplecticFrame, ring: ChartRing, matrix_size: usize) -> Self {
        let dim = frame.dim();
        let z = ChartFunction::zero(ring, dim);
        Self {
            christoffel: vec![vec![vec![z.clone(); dim]; dim]; dim],
            bundle: vec![vec![vec![z; matrix_size]; matrix_size]; dim],
            omega_h: GradedElement::zero(dim, 1, ring),
            frame,
            ring,
            matrix_size,
        }
    }

    pub fn new(
        frame: SymplecticFrame,
        ring: ChartRing,
        matrix_size: usize,
        christoffel: Vec<Vec<Vec<ChartFunction>>>,
        bundle: Vec<Vec<Vec<ChartFunction>>>,
        omega_h: GradedElement,
    ) -> Result<Self> {
        let g = Self { frame, ring, matrix_size, christoffel, bundle, omega_h };
        g.validate()?;
        Ok(g)
    }

    pub fn with_christoffel(mut self, christoffel: Vec<Vec<Vec<ChartFunction>>>) -> Result<Self> {
        self.christoffel = christoffel;
        self.validate()?;
        Ok(self)
    }

    /// Γᵏ_ij = ω^{km} ∂_m∂_i∂_j φ, which is symmetric and symplectic for any φ.
    pub fn with_generating_function(self, phi: &ChartFunction) -> Result<Self> {
        let dim = self.dim();
        let mut third = vec![vec![vec![ChartFunction::zero(self.ring, dim); dim]; dim]; dim];
        for m in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    third[m][i][j] = phi.derive(m).derive(i).derive(j);
                }
            }
        }
        let mut gamma = vec![vec![vec![ChartFunction::zero(self.ring, dim); dim]; dim]; dim];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = ChartFunction::zero(self.ring, dim);
                    for (m, t) in third.iter().enumerate() {
                        let c = self.frame.upper(k, m);
                        if !num_traits::Zero::is_zero(c) {
                            s.add_assign(&t[i][j].scale_rational(c));
                        }
                    }
                    gamma[k][i][j] = s;
                }
            }
        }
        self.with_christoffel(gamma)
    }

    pub fn with_bundle(mut self, bundle: Vec<Vec<Vec<ChartFunction>>>) -> Result<Self> {
        self.matrix_size = bundle.first().map_or(self.matrix_size, |m| m.len());
        self.bundle = bundle;
        self.validate()?;
        Ok(self)
    }

    /// Γ_V = q(dq) − (dq)q, for which q is parallel.
    pub fn with_projector_connection(self, q: &[Vec<ChartFunction>]) -> Result<Self> {
        let dim = self.dim();
        let n = q.len();
        let mut bundle = Vec::with_capacity(dim);
        for i in 0..dim {
            let dq: Vec<Vec<ChartFunction>> = q.iter().map(|r| r.iter().map(|f| f.derive(i)).collect()).collect();
            let a = mat_mul(q, &dq);
            let b = mat_mul(&dq, q);
            bundle.push((0..n).map(|p| (0..n).map(|s| a[p][s].sub(&b[p][s])).collect()).collect());
        }
        self.with_bundle(bundle)
    }

    pub fn with_omega_h(mut self, omega_h: GradedElement) -> Result<Self> {
        self.omega_h = omega_h;
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn frame(&self) -> &SymplecticFrame {
        &self.frame
    }

    pub fn ring(&self) -> ChartRing {
        self.ring
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &ChartFunction {
        &self.christoffel[k][i][j]
    }

    pub fn bundle_component(&self, i: usize) -> &[Vec<ChartFunction>] {
        &self.bundle[i]
    }

    pub fn omega_h(&self) -> &GradedElement {
        &self.omega_h
    }

    pub fn is_flat_bundle_free(&self) -> bool {
        self.bundle.iter().flatten().flatten().all(|f| f.is_zero())
    }

    /// Checks every invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        let bad = |m: String| Err(Error::Geometry(m));
        if self.christoffel.len() != dim
            || self.christoffel.iter().any(|a| a.len() != dim || a.iter().any(|b| b.len() != dim))
        {
            return bad("Christoffel array must be dim × dim × dim".into());
        }
        if self.bundle.len() != dim
            || self.bundle.iter().any(|m| m.len() != self.matrix_size || m.iter().any(|r| r.len() != self.matrix_size))
        {
            return bad(format!("bundle connection must be {dim} matrices of size {}", self.matrix_size));
        }
        for f in self.christoffel.iter().flatten().flatten().chain(self.bundle.iter().flatten().flatten()) {
            if f.ring() != self.ring || f.dim() != dim {
                return bad("coefficient in a different chart ring".into());
            }
        }
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if self.christoffel[k][i][j] != self.christoffel[k][j][i] {
                        return bad(format!("Γ^{}_{}{} ≠ Γ^{}_{}{} (torsion)", k + 1, i + 1, j + 1, k + 1, j + 1, i + 1));
                    }
                }
            }
        }
        // Γ_kij = ω_kl Γˡ_ij must be totally symmetric
        let lowered = self.lowered_christoffel();
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if lowered[k][i][j] != lowered[i][k][j] {
                        return bad(format!("ω_kl Γˡ_ij not symmetric in (k, i) at ({}, {}, {})", k + 1, i + 1, j + 1));
                    }
                }
            }
        }
        let o = &self.omega_h;
        if o.dim() != dim || o.matrix_size() != 1 || o.ring().is_fourier() != self.ring.is_fourier() {
            return bad("Ω_ħ must be a scalar form on the same chart".into());
        }
        if !o.is_exact() {
            return bad("Ω_ħ must be given exactly".into());
        }
        for (k, _) in o.terms() {
            if k.form_degree() != 2 || !k.y.is_zero() {
                return bad("Ω_ħ must be a two-form without fiber variables".into());
            }
            if k.hbar < 1 {
                return bad("Ω_ħ must start at order ħ¹".into());
            }
        }
        if !o.de_rham().is_zero() {
            return bad("Ω_ħ is not closed".into());
        }
        Ok(())
    }

    /// Γ_kij = ω_kl Γˡ_ij.
    pub fn lowered_christoffel(&self) -> Vec<Vec<Vec<ChartFunction>>> {
        let dim = self.dim();
        let mut out = vec![vec![vec![ChartFunction::zero(self.ring, dim); dim]; dim]; dim];
        for k in 0..dim {
            for l in 0..dim {
                let c = self.frame.lower(k, l);
                if num_traits::Zero::is_zero(c) {
                    continue;
                }
                for i in 0..dim {
                    for j in 0..dim {
                        let t = self.christoffel[l][i][j].scale_rational(c);
                        out[k][i][j].add_assign(&t);
                    }
                }
            }
        }
        out
    }

    /// Γ̂ = ½ dxⁱ Γ_lij yˡ yʲ · I_N, so that (1/ħ)[Γ̂, yᵏ] = −dxⁱΓᵏ_ij yʲ.
    pub fn christoffel_generator(&self) -> GradedElement {
        let dim = self.dim();
        let lowered = self.lowered_christoffel();
        let mut out = GradedElement::zero(dim, self.matrix_size, self.ring);
        let half = GaussianRational::from_frac(1, 2);
        for (l, row) in lowered.iter().enumerate() {
            for (i, col) in row.iter().enumerate() {
                for (j, f) in col.iter().enumerate() {
                    if f.is_zero() {
                        continue;
                    }
                    let y = MultiIndex::unit(l).add(&MultiIndex::unit(j));
                    for p in 0..self.matrix_size {
                        out.add_scaled_term(TermKey::new(0, y, 1 << i, p, p), f, &half);
                    }
                }
            }
        }
        out
    }

    /// Γ_V as a matrix one-form.
    pub fn bundle_form(&self) -> GradedElement {
        let dim = self.dim();
        let mut out = GradedElement::zero(dim, self.matrix_size, self.ring);
        for (i, m) in self.bundle.iter().enumerate() {
            for (p, row) in m.iter().enumerate() {
                for (q, f) in row.iter().enumerate() {
                    out.add_term(TermKey::new(0, MultiIndex::zero(), 1 << i, p, q), f);
                }
            }
        }
        out
    }

    /// Ω_ħ · I_N.
    pub fn omega_h_matrix(&self) -> GradedElement {
        let mut out = GradedElement::zero(self.dim(), self.matrix_size, self.ring);
        for p in 0..self.matrix_size {
            out.add_assign(&self.omega_h.embed_block(self.matrix_size, p).expect("scalar block fits"));
        }
        out
    }

    /// The operator of Eq. ∇ without the bundle term:
    /// dxⁱ∂_{xⁱ} − dxⁱΓᵏ_ij yʲ ∂_{yᵏ}, dx multiplying from the left.
    pub(crate) fn nabla_scalar(&self, a: &GradedElement) -> GradedElement {
        let dim = self.dim();
        let mut out = a.de_rham();
        let mut acc = a.zero_like();
        for (key, f) in a.terms() {
            for k in 0..dim {
                let e = key.y.0[k];
                if e == 0 {
                    continue;
                }
                for i in 0..dim {
                    let Some((sign, mask)) = forms::left_mul(i, key.forms) else { continue };
                    for j in 0..dim {
                        let g = &self.christoffel[k][i][j];
                        if g.is_zero() {
                            continue;
                        }
                        let y = key.y.dec(k).inc(j);
                        let c = GaussianRational::from_int(-(sign as i64) * e as i64);
                        acc.add_term(TermKey { forms: mask, y, ..*key }, &f.mul(g).scale(&c));
                    }
                }
            }
        }
        out.add_assign(&acc);
        out.set_precision(a.precision());
        out
    }
}

pub(crate) fn mat_mul(a: &[Vec<ChartFunction>], b: &[Vec<ChartFunction>]) -> Vec<Vec<ChartFunction>> {
    let n = a.len();
    let z = a[0][0].zero_like();
    (0..n)
        .map(|p| {
            (0..n)
                .map(|s| {
                    let mut acc = z.clone();
                    for (t, brow) in b.iter().enumerate() {
                        acc.add_assign(&a[p][t].mul(&brow[s]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}
