use knotops::poisson_operad::*;
use knotops::ratlin::{rat, Rational};
use proptest::prelude::*;

fn el(c: Convention, s: &str) -> OperadElement {
    OperadElement::parse(c, s).unwrap()
}

fn ev(c: Convention, e: &Expr) -> OperadElement {
    OperadElement::from_expr(c, e).unwrap()
}

fn brackets(e: &Expr) -> usize {
    match e {
        Expr::Leaf(_) | Expr::Unit => 0,
        Expr::Mul(a, b) => brackets(a) + brackets(b),
        Expr::Bracket(a, b) => 1 + brackets(a) + brackets(b),
    }
}

/// A random expression over exactly the given labels.
fn build(labels: &[usize], bits: &mut impl Iterator<Item = u8>) -> Expr {
    if labels.len() == 1 {
        return Expr::Leaf(labels[0]);
    }
    let c = bits.next().unwrap_or(0);
    let cut = 1 + (c as usize >> 1) % (labels.len() - 1);
    let (a, b) = (build(&labels[..cut], bits), build(&labels[cut..], bits));
    if c & 1 == 1 {
        Expr::bracket(a, b)
    } else {
        Expr::mul(a, b)
    }
}

/// Three expressions on disjoint labels covering `1..=k`.
fn triple(k: usize, perm_seed: &[u8], bits: &[u8], cuts: (usize, usize)) -> (Expr, Expr, Expr) {
    let mut labels: Vec<usize> = (1..=k).collect();
    for (i, s) in perm_seed.iter().enumerate().take(k) {
        labels.swap(i, i + *s as usize % (k - i));
    }
    let a = 1 + cuts.0 % (k - 2);
    let b = a + 1 + cuts.1 % (k - a - 1);
    let mut it = bits.iter().copied();
    (
        build(&labels[..a], &mut it),
        build(&labels[a..b], &mut it),
        build(&labels[b..], &mut it),
    )
}

fn sign(odd: bool) -> Rational {
    if odd {
        rat(-1)
    } else {
        rat(1)
    }
}

#[test]
fn dimensions_match_partition_oracle() {
    // Σ over set partitions of Π (|B| − 1)!, independently enumerated
    fn partitions(k: usize) -> Vec<Vec<usize>> {
        // block sizes of every set partition, via restricted growth strings
        let mut out = Vec::new();
        let mut rgs = vec![0usize; k];
        loop {
            let blocks = rgs.iter().max().map_or(0, |m| m + 1);
            let mut sizes = vec![0; blocks];
            for &b in &rgs {
                sizes[b] += 1;
            }
            out.push(sizes);
            let mut i = k;
            loop {
                if i <= 1 {
                    return out;
                }
                i -= 1;
                let limit = rgs[..i].iter().max().unwrap() + 1;
                if rgs[i] < limit {
                    rgs[i] += 1;
                    for r in rgs.iter_mut().skip(i + 1) {
                        *r = 0;
                    }
                    break;
                }
            }
        }
    }
    let fact = |m: usize| (1..=m).product::<usize>();
    for n in [4, 5] {
        let c = Convention::new(n).unwrap();
        for k in 1..=7 {
            let oracle: usize = partitions(k).iter().map(|s| s.iter().map(|b| fact(b - 1)).product::<usize>()).sum();
            let computed: usize = (0..k).map(|b| basis(&c, k, b * c.bracket_degree()).len()).sum();
            assert_eq!(computed, oracle, "n = {n}, k = {k}");
            assert_eq!(computed, fact(k));
        }
    }
}

#[test]
fn arity_two_bases() {
    for n in [3, 4, 5, 7] {
        let c = Convention::new(n).unwrap();
        let d = c.bracket_degree();
        let prod: Vec<String> = basis(&c, 2, 0).iter().map(|m| OperadElement::from_monomial(c, m.clone()).to_string()).collect();
        assert_eq!(prod, vec!["1·2"]);
        let br = basis(&c, 2, d);
        assert_eq!(br.len(), 1);
        assert_eq!(OperadElement::from_monomial(c, br[0].clone()), distinguished_elements(c).bracket);
    }
}

#[test]
fn distinguished_relations() {
    for n in [4, 5] {
        let c = Convention::new(n).unwrap();
        let d = distinguished_elements(c);
        assert_eq!(d.product.compose(1, &d.counit).unwrap(), d.unit);
        assert_eq!(d.product.compose(2, &d.counit).unwrap(), d.unit);
        assert!(d.bracket.compose(1, &d.counit).unwrap().is_zero());
        assert_eq!(d.product.compose(1, &d.product).unwrap(), el(c, "1·2·3"));
        assert_eq!(d.product.compose(1, &d.product).unwrap(), d.product.compose(2, &d.product).unwrap());
        assert_eq!(d.bracket.compose(1, &d.unit).unwrap(), d.bracket);
        assert_eq!(d.bracket.sym_action(&[1, 2]).unwrap(), d.bracket);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    // {X,Y} = (−1)^{n + |X||Y|} {Y,X} and X·Y = (−1)^{|X||Y|} Y·X
    #[test]
    fn antisymmetry(n in 3u32..8, k in 3usize..6, ps in prop::collection::vec(any::<u8>(), 6), bits in prop::collection::vec(any::<u8>(), 8), cuts in (0usize..8, 0usize..8)) {
        let c = Convention::new(n).unwrap();
        let d = c.bracket_degree();
        let (x, y, z) = triple(k, &ps, &bits, cuts);
        let x = Expr::mul(x, z);
        let (dx, dy) = (brackets(&x) * d, brackets(&y) * d);
        let lhs = ev(c, &Expr::bracket(x.clone(), y.clone()));
        let rhs = ev(c, &Expr::bracket(y.clone(), x.clone())).scaled(&sign((n as usize + dx * dy) % 2 == 1));
        prop_assert_eq!(lhs, rhs);
        let lhs = ev(c, &Expr::mul(x.clone(), y.clone()));
        let rhs = ev(c, &Expr::mul(y, x)).scaled(&sign(dx * dy % 2 == 1));
        prop_assert_eq!(lhs, rhs);
    }

    // ad_X = {X,−} is a derivation of degree |X| + d of the bracket
    #[test]
    fn jacobi(n in 3u32..8, k in 3usize..6, ps in prop::collection::vec(any::<u8>(), 6), bits in prop::collection::vec(any::<u8>(), 8), cuts in (0usize..8, 0usize..8)) {
        let c = Convention::new(n).unwrap();
        let d = c.bracket_degree();
        let (x, y, z) = triple(k, &ps, &bits, cuts);
        let (dx, dy) = (brackets(&x) * d, brackets(&y) * d);
        let lhs = ev(c, &Expr::bracket(x.clone(), Expr::bracket(y.clone(), z.clone())));
        let t1 = ev(c, &Expr::bracket(Expr::bracket(x.clone(), y.clone()), z.clone()));
        let t2 = ev(c, &Expr::bracket(y.clone(), Expr::bracket(x.clone(), z.clone())));
        let rhs = t1.scaled(&sign(d * (d + dx) % 2 == 1))
            .add(&t2.scaled(&sign((d + dx) * (d + dy) % 2 == 1))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    // ad_X is a derivation of the product
    #[test]
    fn leibniz(n in 3u32..8, k in 3usize..6, ps in prop::collection::vec(any::<u8>(), 6), bits in prop::collection::vec(any::<u8>(), 8), cuts in (0usize..8, 0usize..8)) {
        let c = Convention::new(n).unwrap();
        let d = c.bracket_degree();
        let (x, y, z) = triple(k, &ps, &bits, cuts);
        let (dx, dy) = (brackets(&x) * d, brackets(&y) * d);
        let lhs = ev(c, &Expr::bracket(x.clone(), Expr::mul(y.clone(), z.clone())));
        let t1 = ev(c, &Expr::mul(Expr::bracket(x.clone(), y.clone()), z.clone()));
        let t2 = ev(c, &Expr::mul(y.clone(), Expr::bracket(x.clone(), z.clone())));
        let rhs = t1.add(&t2.scaled(&sign((d + dx) * dy % 2 == 1))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    // composing into a bracket expression equals substituting expressions
    #[test]
    fn composition_is_substitution(n in 3u32..8, k in 3usize..6, ps in prop::collection::vec(any::<u8>(), 6), bits in prop::collection::vec(any::<u8>(), 8), cuts in (0usize..8, 0usize..8)) {
        let c = Convention::new(n).unwrap();
        let (x, y, z) = triple(k, &ps, &bits, cuts);
        let whole = ev(c, &Expr::bracket(Expr::mul(x.clone(), y.clone()), z.clone()));
        // relabel x·y into 1..a and z into a+1..k, compose, then permute back
        let xy = Expr::mul(x, y);
        let (lx, lz) = (xy.leaves(), z.leaves());
        let relabel = |e: &Expr, ls: &[usize]| -> Expr {
            fn go(e: &Expr, ls: &[usize]) -> Expr {
                match e {
                    Expr::Leaf(a) => Expr::Leaf(ls.iter().position(|b| b == a).unwrap() + 1),
                    Expr::Unit => Expr::Unit,
                    Expr::Mul(a, b) => Expr::mul(go(a, ls), go(b, ls)),
                    Expr::Bracket(a, b) => Expr::bracket(go(a, ls), go(b, ls)),
                }
            }
            go(e, ls)
        };
        let (fx, fz) = (ev(c, &relabel(&xy, &lx)), ev(c, &relabel(&z, &lz)));
        let lambda = distinguished_elements(c).bracket;
        let composed = lambda.compose(1, &fx).unwrap().compose(fx.arity() + 1, &fz).unwrap();
        // leaf j of the composite carries original label perm[j]
        let perm: Vec<usize> = lx.iter().chain(lz.iter()).copied().collect();
        prop_assert_eq!(composed.sym_action(&perm).unwrap(), whole);
    }
}
