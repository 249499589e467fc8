//! Kernel SVM: binary SMO and one-vs-one multiclass.

mod kernel;
mod multiclass;
mod smo;

pub use kernel::{kernel_eval, KernelSpec};
pub use multiclass::{
    accuracy, grid_search, GridChoice, MulticlassSvm, PairModel, Prediction, MULTICLASS_FORMAT,
    MULTICLASS_VERSION,
};
pub use smo::{
    kkt_audit, kkt_violation, smo_solve, smo_train, KktAudit, SmoParams, SmoSolution, SvmModel,
    DENSE_GRAM_LIMIT,
};
