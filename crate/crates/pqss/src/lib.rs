//! Positive solutions of coupled (p,q)-Laplacian elliptic systems by the
//! sub-/supersolution method, on P1 simplicial meshes.
//!
//! The system is
//!
//! ```text
//! -Δ_p u - |u|^{p-2} u = λ₁ a(x) f(v) + μ₁ α(x) h(u)   in Ω,
//! -Δ_q v - |v|^{q-2} v = λ₂ b(x) g(u) + μ₂ β(x) γ(v)   in Ω,
//!  u = v = 0                                            on ∂Ω,
//! ```
//!
//! with continuous weights bounded below by positive constants and
//! nondecreasing nonlinearities. The crate builds the explicit ordered
//! sub-/supersolution pairs behind the existence and multiplicity results
//! for such systems, verifies every inequality discretely, and runs
//! monotone iteration between ordered pairs to produce verified discrete
//! solutions.
//!
//! The pieces are exposed individually:
//!
//! * [`mesh`]: interval / unit-square / polygonal-disk meshes with analytic
//!   boundary distances and boundary strips,
//! * [`fem`]: P1 weak forms, a damped-Newton solver for `-Δ_p w = rhs`,
//!   and the discrete sub-/supersolution checker,
//! * [`spectral`]: first Dirichlet eigenpairs of `-Δ_r`, torsion functions,
//!   strip constants, eigenfunction comparability constants,
//! * [`nonlinearity`]: declarative nonlinearity families, hypothesis
//!   checks, the lower bound `k₀`, shifted families,
//! * [`subsuper`]: the explicit ordered and strict pairs with certificates,
//! * [`iterate`]: monotone iteration, the existence pipeline, and the
//!   multiplicity driver,
//! * [`cli`]: configuration, run reports, and the `pqss` command line.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod fem;
pub mod iterate;
pub mod mesh;
pub mod nonlinearity;
pub mod problem;
pub mod spectral;
pub mod subsuper;

pub use fem::field::Field;
pub use fem::forms::{
    apply_p_laplacian_form, apply_power_mass_form, weak_residual_system, WeakResidual,
};
pub use fem::newton::solve_scalar_dirichlet;
pub use fem::subcheck::{check_subsuper, Side, SubSuperReport};
pub use fem::SolverOptions;
pub use mesh::{build_disk_mesh, build_interval_mesh, build_square_mesh, Mesh, NodeSet};
pub use nonlinearity::{
    check_hypotheses, lower_bound_k0, HypothesisReport, NonlinearityQuad, NonlinearitySpec,
};
pub use problem::{ProblemParams, WeightField};
