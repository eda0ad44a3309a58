//! Optimal linear strategies for deterministic minimax LQ team problems.
//!
//! A team of decision makers picks linear maps `u_i = K_i y_i` from their own
//! measurements `y = Du + Ew + v` so as to minimize the worst-case ratio
//!
//! ```text
//!   sup_{(w, v) ≠ 0}  L(w, u) / (‖w‖² + ‖v‖²)
//! ```
//!
//! The measurements depend on the other players' actions (`D ≠ 0`), which is
//! what makes the problem a signaling problem. The crate reformulates it in
//! coordinates `(x, u)` with `x = (w, y)`, where the ratio becomes
//! `J/F` with `J = [x; u]ᵀ Q [x; u]`, `F = [x; u]ᵀ R [x; u]`, and below the
//! ceiling `γ̄ = 1/λ_max(R_uu, Q_uu)` the question "is there a gain with
//! ratio at most γ" is a linear matrix inequality in `K`.
//!
//! ```
//! use teamlmi::{corpus, solver::{bisect_gamma, SolverConfig}};
//!
//! let prob = corpus::witsenhausen(1.0).unwrap();
//! let report = bisect_gamma(&prob, &SolverConfig::default()).unwrap();
//! assert!((report.gamma_star - 0.3820).abs() < 1e-3);
//! assert!(report.oracle_gamma <= report.gamma_star + 1e-6);
//! ```

pub mod corpus;
pub mod lift;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod oracle;
pub mod sdp;
pub mod solver;

pub use lift::{lift_dynamic, DynamicProblem};
pub use model::{BlockGain, GammaFormProblem, Partition, SolveReport, TeamProblem};
pub use oracle::achieved_gamma;
pub use solver::{bisect_gamma, SolverConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/team-problems.md")]
    mod team_problems {}
    #[doc = include_str!("../../../book/src/ceiling.md")]
    mod ceiling {}
    #[doc = include_str!("../../../book/src/gamma-form.md")]
    mod gamma_form {}
    #[doc = include_str!("../../../book/src/lmi.md")]
    mod lmi {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/lifting.md")]
    mod lifting {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
