//! Observables, Poisson structures and the bracket engine.
//!
//! Brackets use the convention `{p, q} = 1` for conjugate pairs, so Hamilton's
//! equations read `dx/dt = {H, x}`.
//!
//! Three structures are supported:
//!
//! * [`PoissonStructure::CanonicalComplex`]: the 4D oscillator phase space in
//!   complex coordinates with `{pi_a, z^b} = {pibar_a, zbar^b} = delta_ab`. On the
//!   real view `z = a + ib`, `pi = c + id` these relations fix the only
//!   non-zero brackets to `{c_a, a_a} = 1/2` and `{d_a, b_a} = -1/2`.
//! * [`PoissonStructure::CanonicalReal`]: `{p_i, q_j} = delta_ij` on
//!   `[q_1..q_n, p_1..p_n]`.
//! * [`PoissonStructure::MonopoleTwisted`]: `{p_i, q_j} = delta_ij`,
//!   `{p_i, p_j} = s eps_ijk q_k / |q|^3` on `[q, p]`.
//!
//! Each structure is contracted term by term in a fixed order so that swapping
//! the two arguments negates every product exactly; antisymmetry therefore
//! holds bit for bit.

use std::fmt;
use std::sync::Arc;

use crate::dual::{Dual, Scalar, D1, D2};
use crate::error::{Error, Result};
use crate::phase::{SystemParams, SINGULAR_EPS};

/// A scalar phase-space function, evaluable on the three scalar levels the
/// engine differentiates through.
pub trait Observable: Send + Sync {
    fn name(&self) -> &str;
    fn eval_f64(&self, x: &[f64]) -> Result<f64>;
    fn eval_d1(&self, x: &[D1]) -> Result<D1>;
    fn eval_d2(&self, x: &[D2]) -> Result<D2>;
}

pub type Obs = Arc<dyn Observable>;

impl fmt::Debug for dyn Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name())
    }
}

/// Scalar types an observable can be evaluated on.
pub trait EvalScalar: Scalar {
    fn eval(obs: &dyn Observable, x: &[Self]) -> Result<Self>;
}

impl EvalScalar for f64 {
    fn eval(obs: &dyn Observable, x: &[f64]) -> Result<f64> {
        obs.eval_f64(x)
    }
}

impl EvalScalar for D1 {
    fn eval(obs: &dyn Observable, x: &[D1]) -> Result<D1> {
        obs.eval_d1(x)
    }
}

impl EvalScalar for D2 {
    fn eval(obs: &dyn Observable, x: &[D2]) -> Result<D2> {
        obs.eval_d2(x)
    }
}

/// Scalar types whose dual lift is also evaluable, i.e. levels at which a
/// gradient can be taken.
pub trait Differentiable: EvalScalar {
    fn eval_lifted(obs: &dyn Observable, x: &[Dual<Self>]) -> Result<Dual<Self>>;
}

impl Differentiable for f64 {
    fn eval_lifted(obs: &dyn Observable, x: &[D1]) -> Result<D1> {
        obs.eval_d1(x)
    }
}

impl Differentiable for D1 {
    fn eval_lifted(obs: &dyn Observable, x: &[D2]) -> Result<D2> {
        obs.eval_d2(x)
    }
}

/// Signature of a generic formula monomorphized at one scalar level. The
/// `usize` selects a component for vector-valued quantities.
pub type Formula<S> = fn(&[S], &SystemParams, usize) -> Result<S>;

/// Observable backed by a generic formula and a fixed parameter set.
#[derive(Clone)]
pub struct FnObservable {
    name: String,
    params: SystemParams,
    index: usize,
    f0: Formula<f64>,
    f1: Formula<D1>,
    f2: Formula<D2>,
}

impl FnObservable {
    pub fn new(name: impl Into<String>, params: SystemParams, index: usize, f0: Formula<f64>, f1: Formula<D1>, f2: Formula<D2>) -> Self {
        FnObservable { name: name.into(), params, index, f0, f1, f2 }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }
}

impl Observable for FnObservable {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        (self.f0)(x, &self.params, self.index)
    }
    fn eval_d1(&self, x: &[D1]) -> Result<D1> {
        (self.f1)(x, &self.params, self.index)
    }
    fn eval_d2(&self, x: &[D2]) -> Result<D2> {
        (self.f2)(x, &self.params, self.index)
    }
}

/// Builds an [`Obs`] from a generic formula `fn f<S: Scalar>(&[S], &SystemParams, usize) -> Result<S>`.
#[macro_export]
macro_rules! observable {
    ($name:expr, $params:expr, $index:expr, $($f:ident)::+) => {
        ::std::sync::Arc::new($crate::bracket::FnObservable::new(
            $name,
            $params,
            $index,
            $($f)::+::<f64>,
            $($f)::+::<$crate::dual::D1>,
            $($f)::+::<$crate::dual::D2>,
        )) as $crate::bracket::Obs
    };
    ($name:expr, $params:expr, $($f:ident)::+) => {
        $crate::observable!($name, $params, 0, $($f)::+)
    };
}

/// The i-th coordinate of the real view.
#[derive(Debug, Clone)]
pub struct Coordinate {
    index: usize,
    name: String,
}

impl Coordinate {
    pub fn new(index: usize, name: impl Into<String>) -> Self {
        Coordinate { index, name: name.into() }
    }

    pub fn shared(index: usize, name: impl Into<String>) -> Obs {
        Arc::new(Self::new(index, name))
    }

    fn pick<S: Copy>(&self, x: &[S]) -> Result<S> {
        x.get(self.index).copied().ok_or_else(|| Error::Contract(format!("coordinate {} out of range {}", self.index, x.len())))
    }
}

impl Observable for Coordinate {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.pick(x)
    }
    fn eval_d1(&self, x: &[D1]) -> Result<D1> {
        self.pick(x)
    }
    fn eval_d2(&self, x: &[D2]) -> Result<D2> {
        self.pick(x)
    }
}

#[derive(Debug, Clone)]
pub struct Constant(pub f64);

impl Observable for Constant {
    fn name(&self) -> &str {
        "constant"
    }
    fn eval_f64(&self, _: &[f64]) -> Result<f64> {
        Ok(self.0)
    }
    fn eval_d1(&self, _: &[D1]) -> Result<D1> {
        Ok(D1::from_f64(self.0))
    }
    fn eval_d2(&self, _: &[D2]) -> Result<D2> {
        Ok(D2::from_f64(self.0))
    }
}

/// Pointwise product of two observables.
pub struct Product {
    a: Obs,
    b: Obs,
    name: String,
}

impl Product {
    pub fn shared(a: Obs, b: Obs) -> Obs {
        let name = format!("({})*({})", a.name(), b.name());
        Arc::new(Product { a, b, name })
    }
}

impl Observable for Product {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        Ok(self.a.eval_f64(x)? * self.b.eval_f64(x)?)
    }
    fn eval_d1(&self, x: &[D1]) -> Result<D1> {
        Ok(self.a.eval_d1(x)? * self.b.eval_d1(x)?)
    }
    fn eval_d2(&self, x: &[D2]) -> Result<D2> {
        Ok(self.a.eval_d2(x)? * self.b.eval_d2(x)?)
    }
}

/// The bracket `{f, g}` as an observable in its own right. Supports one
/// further level of differentiation, which is what the Jacobi identity needs.
pub struct BracketObservable {
    f: Obs,
    g: Obs,
    structure: PoissonStructure,
    name: String,
}

impl BracketObservable {
    pub fn shared(f: Obs, g: Obs, structure: PoissonStructure) -> Obs {
        let name = format!("{{{},{}}}", f.name(), g.name());
        Arc::new(BracketObservable { f, g, structure, name })
    }
}

impl Observable for BracketObservable {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        bracket_at(self.f.as_ref(), self.g.as_ref(), x, &self.structure)
    }
    fn eval_d1(&self, x: &[D1]) -> Result<D1> {
        bracket_at(self.f.as_ref(), self.g.as_ref(), x, &self.structure)
    }
    fn eval_d2(&self, _: &[D2]) -> Result<D2> {
        Err(Error::DerivativeOrder(self.name.clone()))
    }
}

/// Poisson structure on a real phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonStructure {
    CanonicalComplex,
    CanonicalReal { dof: usize },
    MonopoleTwisted { s: f64 },
}

impl PoissonStructure {
    pub fn dim(&self) -> usize {
        match self {
            PoissonStructure::CanonicalComplex => 8,
            PoissonStructure::CanonicalReal { dof } => 2 * dof,
            PoissonStructure::MonopoleTwisted { .. } => 6,
        }
    }

    /// Rejects points of the wrong dimension and, for the twisted structure,
    /// points on the monopole.
    pub fn check_admissible<S: Scalar>(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Contract(format!("point has {} components, structure expects {}", x.len(), self.dim())));
        }
        if let PoissonStructure::MonopoleTwisted { .. } = self {
            let r = (x[0].value().powi(2) + x[1].value().powi(2) + x[2].value().powi(2)).sqrt();
            if r < SINGULAR_EPS {
                return Err(Error::Singularity(format!("|q| = {r:e} < {SINGULAR_EPS:e} (monopole at origin)")));
            }
        }
        Ok(())
    }

    /// `sum_ij a_i P_ij(x) b_j`.
    pub fn contract<S: Scalar>(&self, x: &[S], a: &[S], b: &[S]) -> S {
        let half = S::from_f64(0.5);
        match *self {
            PoissonStructure::CanonicalComplex => {
                let mut acc = S::zero();
                for al in 0..2 {
                    let (re_z, im_z, re_p, im_p) = (2 * al, 2 * al + 1, 4 + 2 * al, 5 + 2 * al);
                    acc += half * (a[re_p] * b[re_z] - a[re_z] * b[re_p]);
                    acc -= half * (a[im_p] * b[im_z] - a[im_z] * b[im_p]);
                }
                acc
            }
            PoissonStructure::CanonicalReal { dof } => canonical_part(a, b, dof),
            PoissonStructure::MonopoleTwisted { s } => {
                let mut acc = canonical_part(a, b, 3);
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let r3 = r2 * r2.sqrt();
                let (ap, bp) = (&a[3..6], &b[3..6]);
                let cross = [ap[1] * bp[2] - ap[2] * bp[1], ap[2] * bp[0] - ap[0] * bp[2], ap[0] * bp[1] - ap[1] * bp[0]];
                let triple = cross[0] * x[0] + cross[1] * x[1] + cross[2] * x[2];
                acc += S::from_f64(s) * triple / r3;
                acc
            }
        }
    }

    /// Dense structure matrix `P_ij = {x_i, x_j}` at `x`.
    pub fn matrix(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_admissible(x)?;
        let n = self.dim();
        let unit = |i: usize| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        };
        Ok((0..n).map(|i| (0..n).map(|j| self.contract(x, &unit(i), &unit(j))).collect()).collect())
    }
}

fn canonical_part<S: Scalar>(a: &[S], b: &[S], dof: usize) -> S {
    let mut acc = S::zero();
    for i in 0..dof {
        acc += a[dof + i] * b[i] - a[i] * b[dof + i];
    }
    acc
}

/// Exact gradient of `f` at a point of any differentiable scalar level.
pub fn grad_at<S: Differentiable>(f: &dyn Observable, x: &[S]) -> Result<Vec<S>> {
    let mut seeded: Vec<Dual<S>> = x.iter().map(|&v| Dual::constant(v)).collect();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        seeded[i].d = S::one();
        out.push(S::eval_lifted(f, &seeded)?.d);
        seeded[i].d = S::zero();
    }
    Ok(out)
}

/// Gradient by forward-mode dual numbers.
pub fn grad(f: &dyn Observable, x: &[f64]) -> Result<Vec<f64>> {
    grad_at(f, x)
}

/// `{f, g}` at a point of any differentiable scalar level.
pub fn bracket_at<S: Differentiable>(f: &dyn Observable, g: &dyn Observable, x: &[S], structure: &PoissonStructure) -> Result<S> {
    structure.check_admissible(x)?;
    let gf = grad_at(f, x)?;
    let gg = grad_at(g, x)?;
    Ok(structure.contract(x, &gf, &gg))
}

pub fn poisson_bracket(f: &dyn Observable, g: &dyn Observable, x: &[f64], structure: &PoissonStructure) -> Result<f64> {
    bracket_at(f, g, x, structure)
}

/// `|{f, g}| / max(|f|, |g|, 1)`, the scale-free residual used for integrability claims.
pub fn relative_bracket(f: &dyn Observable, g: &dyn Observable, x: &[f64], structure: &PoissonStructure) -> Result<f64> {
    let b = poisson_bracket(f, g, x, structure)?;
    let scale = f.eval_f64(x)?.abs().max(g.eval_f64(x)?.abs()).max(1.0);
    Ok(b.abs() / scale)
}

/// Hamiltonian flow `dx_i/dt = {H, x_i}`.
pub fn hamiltonian_vector_field(h: &dyn Observable, x: &[f64], structure: &PoissonStructure) -> Result<Vec<f64>> {
    structure.check_admissible(x)?;
    let gh = grad(h, x)?;
    let n = x.len();
    let mut e = vec![0.0; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        e[i] = 1.0;
        out.push(structure.contract(x, &gh, &e));
        e[i] = 0.0;
    }
    Ok(out)
}

/// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|` at `x`.
pub fn check_jacobi(structure: &PoissonStructure, x: &[f64], f: &Obs, g: &Obs, h: &Obs) -> Result<f64> {
    let cyc = |a: &Obs, b: &Obs, c: &Obs| -> Result<f64> {
        let inner = BracketObservable::shared(b.clone(), c.clone(), *structure);
        poisson_bracket(a.as_ref(), inner.as_ref(), x, structure)
    };
    Ok((cyc(f, g, h)? + cyc(g, h, f)? + cyc(h, f, g)?).abs())
}

/// Coordinate observables for a structure's real view, with conventional names.
pub fn coordinates(structure: &PoissonStructure) -> Vec<Obs> {
    let names: Vec<String> = match structure {
        PoissonStructure::CanonicalComplex => {
            ["re_z1", "im_z1", "re_z2", "im_z2", "re_pi1", "im_pi1", "re_pi2", "im_pi2"].iter().map(|s| s.to_string()).collect()
        }
        PoissonStructure::MonopoleTwisted { .. } => ["q1", "q2", "q3", "p1", "p2", "p3"].iter().map(|s| s.to_string()).collect(),
        PoissonStructure::CanonicalReal { dof } => {
            (0..*dof).map(|i| format!("x{}", i + 1)).chain((0..*dof).map(|i| format!("p{}", i + 1))).collect()
        }
    };
    names.into_iter().enumerate().map(|(i, n)| Coordinate::shared(i, n)).collect()
}
