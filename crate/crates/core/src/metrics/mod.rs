//! Evaluation and theory checks: objective cost, classification error, the
//! recovery assumptions, structural statistics of a relaxation solution and the
//! core geometry of planted clusters.

mod assumptions;
mod matching;
pub mod spectral;
mod structure;

pub use assumptions::{check_assumptions, AssumptionsReport};
pub use matching::{classification_error, ClassificationError};
pub use structure::{
    core_structure, schedule_delta, structural_stats, ClusterCore, CoreStructureReport, StructuralStats,
    RHO_CORE, RHO_INTER,
};

use crate::error::{Error, Result};
use crate::instance::{Clustering, Edge, Instance, Sign};

/// Whether an edge disagrees with a clustering.
pub fn disagrees(edge: &Edge, clustering: &Clustering) -> bool {
    match edge.sign {
        Sign::Plus => !clustering.same(edge.u, edge.v),
        Sign::Minus => clustering.same(edge.u, edge.v),
    }
}

/// Total cost of plus edges cut and minus edges kept inside a cluster.
pub fn clustering_cost(instance: &Instance, clustering: &Clustering) -> Result<f64> {
    if clustering.n() != instance.n() {
        return Err(Error::param(format!(
            "clustering has {} labels, instance has {} vertices",
            clustering.n(),
            instance.n()
        )));
    }
    Ok(instance
        .edges()
        .iter()
        .filter(|e| disagrees(e, clustering))
        .map(|e| e.cost)
        .sum())
}
