use num_bigint::BigUint;
use proptest::prelude::*;
use vsl_bdd::{Manager, NodeRef};

#[derive(Debug, Clone)]
enum Expr {
    Var(u32),
    Const(bool),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xnor(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, bits: u32) -> bool {
        match self {
            Expr::Var(i) => bits >> i & 1 == 1,
            Expr::Const(b) => *b,
            Expr::Not(e) => !e.eval(bits),
            Expr::And(a, b) => a.eval(bits) && b.eval(bits),
            Expr::Or(a, b) => a.eval(bits) || b.eval(bits),
            Expr::Xnor(a, b) => a.eval(bits) == b.eval(bits),
        }
    }

    fn build(&self, m: &mut Manager) -> NodeRef {
        match self {
            Expr::Var(i) => m.var(*i).unwrap(),
            Expr::Const(b) => m.constant(*b),
            Expr::Not(e) => {
                let f = e.build(m);
                m.negate(f).unwrap()
            }
            Expr::And(a, b) => {
                let (f, g) = (a.build(m), b.build(m));
                m.and(f, g).unwrap()
            }
            Expr::Or(a, b) => {
                let (f, g) = (a.build(m), b.build(m));
                m.or(f, g).unwrap()
            }
            Expr::Xnor(a, b) => {
                let (f, g) = (a.build(m), b.build(m));
                m.xnor(f, g).unwrap()
            }
        }
    }

    /// Same function, different syntax: De Morgan rewrites and operand swaps.
    fn disguise(&self) -> Expr {
        let not = |e: Expr| Expr::Not(Box::new(e));
        match self {
            Expr::Var(_) | Expr::Const(_) => not(not(self.clone())),
            Expr::Not(e) => not(e.disguise()),
            Expr::And(a, b) => not(Expr::Or(Box::new(not(b.disguise())), Box::new(not(a.disguise())))),
            Expr::Or(a, b) => not(Expr::And(Box::new(not(b.disguise())), Box::new(not(a.disguise())))),
            Expr::Xnor(a, b) => Expr::Or(
                Box::new(Expr::And(Box::new(a.disguise()), Box::new(b.disguise()))),
                Box::new(Expr::And(Box::new(not(a.disguise())), Box::new(not(b.disguise())))),
            ),
        }
    }
}

fn expr(vars: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0..vars).prop_map(Expr::Var), any::<bool>().prop_map(Expr::Const),];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Xnor(Box::new(a), Box::new(b))),
        ]
    })
}

fn brute_count(e: &Expr, vars: u32) -> u64 {
    (0..1u32 << vars).filter(|&b| e.eval(b)).count() as u64
}

proptest! {
    #[test]
    fn equivalent_expressions_share_a_handle(e in expr(8)) {
        let mut m = Manager::new(8);
        let f = e.build(&mut m);
        let g = e.disguise().build(&mut m);
        prop_assert_eq!(f, g);
    }

    #[test]
    fn count_matches_truth_table(e in expr(12)) {
        let mut m = Manager::new(12);
        let f = e.build(&mut m);
        prop_assert_eq!(m.count_minterms(f, 12).unwrap(), BigUint::from(brute_count(&e, 12)));
        for bits in (0..1u32 << 12).step_by(37) {
            let assignment: Vec<bool> = (0..12).map(|i| bits >> i & 1 == 1).collect();
            prop_assert_eq!(m.eval(f, &assignment).unwrap(), e.eval(bits));
        }
    }

    #[test]
    fn count_plus_complement_is_full_space(e in expr(10), extra in 0u32..4) {
        let over = 10 + extra;
        let mut m = Manager::new(over);
        let f = e.build(&mut m);
        let nf = m.negate(f).unwrap();
        let total = m.count_minterms(f, over).unwrap() + m.count_minterms(nf, over).unwrap();
        prop_assert_eq!(total, BigUint::from(1u64) << over);
    }

    #[test]
    fn enumeration_is_complete_sorted_and_duplicate_free(e in expr(8)) {
        let mut m = Manager::new(8);
        let f = e.build(&mut m);
        let all = m.enumerate_minterms(f, 8, usize::MAX).unwrap();
        prop_assert!(!all.more);
        prop_assert_eq!(BigUint::from(all.assignments.len()), m.count_minterms(f, 8).unwrap());
        for w in all.assignments.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for a in &all.assignments {
            prop_assert!(m.eval(f, a).unwrap());
        }
    }
}
