use proptest::prelude::*;

use momenta_core::bracket::{jacobi_report, BracketEngine, BracketRule};
use momenta_core::expr::rat;
use momenta_core::{bracket_moments, enumerate_moments, Expr, MomentIndex};

fn moment(dofs: usize, max_order: u32) -> impl Strategy<Value = MomentIndex> {
    let all = enumerate_moments(dofs, max_order).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetric_one_dof(a in moment(1, 5), b in moment(1, 5)) {
        let ab = bracket_moments(&a, &b).unwrap();
        let ba = bracket_moments(&b, &a).unwrap();
        prop_assert_eq!(ab, -ba);
    }

    #[test]
    fn antisymmetric_two_dofs(a in moment(2, 4), b in moment(2, 4)) {
        for rule in [BracketRule::Exact, BracketRule::Printed] {
            let e = BracketEngine::new(2, rule);
            prop_assert_eq!(e.moments(&a, &b).unwrap(), -e.moments(&b, &a).unwrap());
        }
    }

    #[test]
    fn order_drops_by_two(a in moment(2, 4), b in moment(2, 4)) {
        // every product or single moment in {A, B} has total order a + b - 2
        let e = bracket_moments(&a, &b).unwrap();
        let target = a.order() + b.order() - 2;
        for (m, _) in e.terms() {
            let ord: u32 = m.moments.iter().map(|g| g.order()).sum();
            prop_assert_eq!(ord + 2 * m.hbar, target);
        }
    }

    #[test]
    fn leibniz(a in moment(2, 3), b in moment(2, 3), c in moment(2, 3)) {
        let e = BracketEngine::new(2, BracketRule::Exact);
        let (ea, eb, ec) = (Expr::moment(a), Expr::moment(b), Expr::moment(c));
        let lhs = e.functions(&(&ea * &eb), &ec).unwrap();
        let rhs = &ea * &e.functions(&eb, &ec).unwrap() + &e.functions(&ea, &ec).unwrap() * &eb;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn linear_in_first_slot(a in moment(1, 4), b in moment(1, 4), c in moment(1, 4), k in -5i128..5) {
        let e = BracketEngine::new(1, BracketRule::Exact);
        let f = Expr::moment(a.clone()) + Expr::moment(b.clone()).scale(rat(k, 3));
        let lhs = e.functions(&f, &Expr::moment(c.clone())).unwrap();
        let rhs = bracket_moments(&a, &c).unwrap() + bracket_moments(&b, &c).unwrap().scale(rat(k, 3));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn jacobi_low_orders() {
    for (dofs, order) in [(1, 3), (2, 2)] {
        let engine = BracketEngine::new(dofs, BracketRule::Exact);
        let ms = enumerate_moments(dofs, order).unwrap();
        let rep = jacobi_report(&engine, &ms).unwrap();
        assert!(rep.failures.is_empty(), "{dofs} dofs: {} of {} triples fail", rep.failures.len(), rep.checked);
    }
}
