//! Limit laws of normed row sums of exchangeable arrays.
//!
//! The crate evaluates stable and mixed-stable characteristic functions,
//! simulates arrays directed by a random probability measure, computes the
//! per-realization characteristic quantities that govern convergence, and
//! tests the convergence criteria by Monte Carlo over draws of the directing
//! measure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod criteria;
pub mod directing;
pub mod empirics;
pub mod error;
pub mod measure;
pub mod mixture;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stable;
mod stable_dist;

pub use characteristics::{Nu12Atom, SpectralFit, SpectralParams};
pub use criteria::{Criterion, CriterionVerdict, NGrid, StatTestConfig, SubCheck, Verdict};
pub use directing::{
    draw_directing, replicate_sums, sample_array_replicates, sample_array_sums, BaseFamily,
    DirectingLaw, DirectingMeasure, Prior, Randomizer, RowSums,
};
pub use empirics::{
    builtin, run_criterion, run_scenario, ScenarioConfig, ScenarioReport, TGrid, TargetLaw,
    BUILTIN_SCENARIOS, SCHEMA_VERSION,
};
pub use error::{Error, Result};
pub use measure::AtomicMeasure;
pub use mixture::{
    example1_gaussian_mixture, id_mixture_cf, joint_mixture_cf, mixture_cf, IdMixingMeasure,
    MixingMeasure,
};
pub use stable::{
    eval_g, eval_w, levy_khintchine_psi, norming_values, sample_stable, stable_cf, Centering,
    LevyKhintchinePair, NormingSequence, SlowVariation, StableParams,
};
