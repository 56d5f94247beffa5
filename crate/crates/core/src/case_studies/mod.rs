//! The loop-model and compass case studies: causal mechanisms and their
//! intervention boxes, the two embeddings of the loop model, and the
//! compass contradiction.

mod compass;
mod embedding;
mod mechanisms;

pub use compass::{
    compass_contradiction, family_lines, parameter_grid, ContradictionTrace, Poly, TerminalCondition, TraceOutcome,
    TraceStep,
};
pub use embedding::{
    degenerate_embedding_check, loop_model_at, safe_embedding_check, DegenerateReport, PermittedInfluence, SafeReport,
};
pub use mechanisms::{
    affects, affects_relations, build_model, observed_law, AffectsEntry, CausalMechanism, Evaluation, Model, Pattern,
    Term,
};

use crate::boxes::BoxError;
use crate::causal_geometry::GeometryError;
use crate::ons::OnsError;
use crate::protocol::ProtocolError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaseStudyError {
    #[error("layout does not have the required causal relations: {0}")]
    LayoutMismatch(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unexpected result: {0}")]
    Unexpected(String),
    #[error(transparent)]
    Ons(#[from] OnsError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Box(#[from] BoxError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{marginal_of_row, validate_box};
    use crate::causal_geometry::ev;
    use crate::layouts::Preset;
    use crate::rational::{int, rat};
    use crate::Rational;

    fn model(m: Model) -> crate::boxes::CorrelationBox {
        let l = Preset::Fig5.layout();
        build_model(
            m,
            l.backend.clone(),
            &l.input_events().try_into().unwrap(),
            &l.output_events().try_into().unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn models_share_the_observed_law() {
        for m in [Model::Otp, Model::Jam, Model::Loop] {
            let b = model(m);
            assert!(validate_box(&b).is_valid());
            assert_eq!(b.row(0), observed_law().as_slice());
        }
        let lp = model(Model::Loop);
        let otp = model(Model::Otp);
        let jam = model(Model::Jam);
        let r = lp.setting_radix();
        for (ia, ic) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let x = r.encode(&[ia, 0, ic]);
            assert_eq!(lp.row(x), otp.row(x));
        }
        for ib in [1, 2] {
            let x = r.encode(&[0, ib, 0]);
            assert_eq!(lp.row(x), jam.row(x));
        }
        // do(a'), idle, do(c') forces b = a' ⊕ c'
        let m = marginal_of_row(lp.row(r.encode(&[1, 0, 2])), &lp.outcome_radix(), &[1]);
        assert_eq!(m.probs, vec![Rational::from_integer(0.into()), int(1)]);
        // idle, do(b'), idle: (1/2)·δ_{a⊕c, b'}
        let m = marginal_of_row(lp.row(r.encode(&[0, 2, 0])), &lp.outcome_radix(), &[0, 2]);
        assert_eq!(m.probs, vec![int(0), rat(1, 2), rat(1, 2), int(0)]);
    }

    #[test]
    fn loop_affects_relations() {
        let e = affects_relations(&model(Model::Loop));
        assert_eq!(affects(&e, &["I_A", "I_C"], &["B"]), Some(true));
        assert_eq!(affects(&e, &["I_A"], &["B"]), Some(false));
        assert_eq!(affects(&e, &["I_C"], &["B"]), Some(false));
        assert_eq!(affects(&e, &["I_B"], &["A", "C"]), Some(true));
        assert_eq!(affects(&e, &["I_B"], &["A"]), Some(false));
        assert_eq!(affects(&e, &["I_B"], &["C"]), Some(false));
    }

    #[test]
    fn degenerate_and_safe_embeddings() {
        let d = degenerate_embedding_check().unwrap();
        let h = &d.headline;
        assert_eq!(h.instance.g, vec![1]);
        let mut ps = [h.p1.clone(), h.p2.clone()];
        ps.sort();
        assert_eq!(ps, [rat(1, 2), int(1)]);
        assert_eq!(d.protocol.exact_tv(), rat(1, 2));
        assert!(d.ac_from_ib.is_separated());
        assert_eq!(d.ac_from_ib.gathering_point(), Some(&ev(int(1), int(0))));
        assert!(d.b_from_iac.is_not_separated());

        let s = safe_embedding_check(&Preset::Fig5.layout()).unwrap();
        assert!(s.passes(), "{s:?}");

        let mut l = Preset::Fig5.layout();
        l.outputs[1].1 = ev(int(1), int(0));
        assert!(matches!(
            safe_embedding_check(&l),
            Err(CaseStudyError::LayoutMismatch(_))
        ));
    }

    #[test]
    fn compass_trace_on_grid_and_ablation() {
        for (l, m) in parameter_grid() {
            let t = compass_contradiction(&l, &m, None).unwrap();
            let TraceOutcome::Contradiction { terminal } = &t.outcome else {
                panic!("expected a contradiction at {l}, {m}: {t:?}");
            };
            assert_eq!((terminal.0.mu.clone(), terminal.1.mu.clone()), (int(0), int(1)));
        }
        let half = rat(1, 2);
        let open: Vec<usize> = (0..5)
            .filter(|&k| !compass_contradiction(&half, &half, Some(k)).unwrap().is_contradiction())
            .collect();
        assert_eq!(open, vec![4]);
    }
}
