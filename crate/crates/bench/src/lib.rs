//! Fixed workloads shared by the criterion benches.

use awmc::logic::generate_models;
use awmc::transforms::generate_hms_models;
use awmc::{enumerate_formulas, Formula, HmsModel, KripkeLatticeModel};

pub const SEED: u64 = 7;

/// Random lattice models at the largest desk-scale shape.
pub fn klm_corpus(count: usize) -> Vec<KripkeLatticeModel> {
    generate_models(SEED, 3, 4, 2, count)
}

pub fn hms_corpus(count: usize) -> Vec<HmsModel> {
    generate_hms_models(SEED, 2, 4, 2, count)
}

/// Depth-2 formulas over the trade vocabulary.
pub fn trade_formulas() -> Vec<Formula> {
    let klm = awmc::fixtures::trade_klm();
    let base = klm.lattice().base();
    enumerate_formulas(base.atoms(), base.agents(), 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_nonempty() {
        assert_eq!(klm_corpus(3).len(), 3);
        assert_eq!(hms_corpus(2).len(), 2);
        assert_eq!(trade_formulas().len(), 507);
    }
}
