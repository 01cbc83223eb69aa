mod common;

use common::*;
use docforge::codec::{DocTree, Value};
use docforge::metrics::{
    anls, classification_accuracy, levenshtein, nls, nted, nted_trees, ted, tree_of, LabeledTree, MetricError,
    TreeNode,
};
use proptest::prelude::*;
use rand::Rng;

const AB: [&str; 2] = ["a", "b"];
const ABC: [&str; 3] = ["a", "b", "c"];

#[test]
fn ted_agrees_with_forest_oracle_on_small_trees() {
    let mut trees: Vec<LabeledTree> = vec![LabeledTree::Empty];
    trees.extend(all_trees(4, &AB).iter().map(|t| labeled(std::slice::from_ref(t))));
    let mut oracle = ForestOracle::new();
    let ids: Vec<u32> = trees.iter().map(|t| oracle.intern(&forest_of(t))).collect();
    oracle.solve();
    for (a, &ia) in trees.iter().zip(&ids) {
        for (b, &ib) in trees.iter().zip(&ids) {
            assert_eq!(ted(a, b), oracle.distance(ia, ib), "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn tree_enumeration_counts() {
    // Ordered trees with n nodes: Catalan(n - 1), times 2^n labelings.
    let counts = [1usize, 1, 2, 5, 14, 42];
    let trees = all_trees(6, &AB);
    for n in 1..=6 {
        let got = trees.iter().filter(|t| t.size() == n).count();
        assert_eq!(got, counts[n - 1] << n, "n = {n}");
    }
    assert!(unique(trees.iter()));
}

#[test]
fn known_distances() {
    let t = |s: &str| -> LabeledTree {
        // Tiny s-expression reader: "a(b c(d))".
        fn parse(chars: &[char], pos: &mut usize) -> TreeNode {
            let label = chars[*pos].to_string();
            *pos += 1;
            let mut kids = Vec::new();
            if *pos < chars.len() && chars[*pos] == '(' {
                *pos += 1;
                while chars[*pos] != ')' {
                    if chars[*pos] == ' ' {
                        *pos += 1;
                        continue;
                    }
                    kids.push(parse(chars, pos));
                }
                *pos += 1;
            }
            TreeNode::new(label, kids)
        }
        let chars: Vec<char> = s.chars().collect();
        LabeledTree::Node(parse(&chars, &mut 0))
    };
    assert_eq!(ted(&t("a"), &t("a")), 0);
    assert_eq!(ted(&t("a"), &t("b")), 1);
    assert_eq!(ted(&t("a(b c)"), &t("a(c b)")), 2);
    assert_eq!(ted(&t("a(b(c d))"), &t("a(c d)")), 1);
    assert_eq!(ted(&t("f(d(a c(b)) e)"), &t("f(c(d(a b)) e)")), 2);
    assert_eq!(ted(&LabeledTree::Empty, &t("a(b c)")), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ted_matches_oracle_on_random_trees(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (na, nb) = (r.gen_range(0..=9), r.gen_range(0..=9));
        let a = random_tree(&mut r, na, &ABC);
        let b = random_tree(&mut r, nb, &ABC);
        prop_assert_eq!(ted(&a, &b), ForestOracle::tree_distance(&a, &b));
    }

    #[test]
    fn ted_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut next = || {
            let n = r.gen_range(0..=10);
            random_tree(&mut r, n, &ABC)
        };
        let (a, b, c) = (next(), next(), next());
        prop_assert_eq!(ted(&a, &a), 0);
        prop_assert_eq!(ted(&a, &b) == 0, a == b);
        prop_assert_eq!(ted(&a, &b), ted(&b, &a));
        prop_assert!(ted(&a, &c) <= ted(&a, &b) + ted(&b, &c));
        prop_assert!(ted(&a, &b) <= a.node_count() + b.node_count());
    }

    #[test]
    fn levenshtein_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_string(&mut r, 40);
        let b = random_string(&mut r, 40);
        prop_assert_eq!(levenshtein(&a, &b), levenshtein_oracle(&a, &b));
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
    }

    #[test]
    fn nted_anchors(seed in any::<u64>()) {
        let gt = random_doctree(&mut rng(seed), &TreeParams::default());
        let n = tree_of(&gt).node_count();
        prop_assert_eq!(nted(&gt, &gt).unwrap(), 0.0);
        prop_assert_eq!(nted(&DocTree::new(), &gt).unwrap(), (n - 1) as f64 / n as f64 * 100.0);
    }

    #[test]
    fn anls_without_threshold_is_max_nls(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pred = random_string(&mut r, 12);
        let golds: Vec<String> = (0..r.gen_range(1..4)).map(|_| random_string(&mut r, 12)).collect();
        let best = golds.iter().map(|g| nls(&pred, g)).fold(0.0, f64::max);
        prop_assert_eq!(anls(&pred, &golds, 0.0).unwrap(), best);
        prop_assert_eq!(anls(&pred.to_ascii_uppercase(), &golds, 0.5).unwrap(), anls(&pred, &golds, 0.5).unwrap());
    }

    #[test]
    fn nted_is_zero_iff_trees_match(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = TreeParams { max_nodes: 8, names: vec!["a".into(), "b".into()], ..TreeParams::default() };
        let (x, y) = (random_doctree(&mut r, &p), random_doctree(&mut r, &p));
        prop_assert_eq!(nted(&x, &y).unwrap() == 0.0, tree_of(&x) == tree_of(&y));
    }

    #[test]
    fn anls_is_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pred = random_string(&mut r, 12);
        let golds: Vec<String> = (0..r.gen_range(1..4)).map(|_| random_string(&mut r, 12)).collect();
        let s = anls(&pred, &golds, 0.5).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(s == 0.0 || s >= 0.5);
    }
}

#[test]
fn tree_of_layout() {
    let doc = DocTree::from_pairs([
        ("menu", Value::Array(vec![Value::text("a"), Value::text("b")])),
        ("total", Value::text("")),
    ]);
    // <root>, two menu nodes with a leaf each, total with an empty leaf.
    assert_eq!(tree_of(&doc).node_count(), 7);
    assert_eq!(tree_of(&DocTree::new()).node_count(), 1);
}

#[test]
fn one_relabel_in_five_nodes_is_twenty() {
    let gt = DocTree::from_pairs([("class", Value::text("memo")), ("x", Value::text(""))]);
    let pred = DocTree::from_pairs([("class", Value::text("letter")), ("x", Value::text(""))]);
    assert_eq!(tree_of(&gt).node_count(), 5);
    assert_eq!(nted(&pred, &gt).unwrap(), 20.0);
}

#[test]
fn nted_requires_nonempty_ground_truth() {
    assert!(matches!(
        nted_trees(&LabeledTree::Empty, &LabeledTree::Empty),
        Err(MetricError::EmptyGroundTruth)
    ));
}

#[test]
fn anls_fixtures() {
    assert_eq!(anls("hello", &["hello"], 0.5).unwrap(), 1.0);
    assert_eq!(anls("helo", &["hello"], 0.5).unwrap(), 0.8);
    assert_eq!(levenshtein("kitten", "sitting"), 3);
    assert_eq!(nls("kitten", "sitting"), 4.0 / 7.0);
    assert_eq!(anls("kitten", &["sitting"], 0.5).unwrap(), 4.0 / 7.0);
    assert_eq!(anls("abc", &["xyz"], 0.5).unwrap(), 0.0);
    // No shared characters: five substitutions.
    assert_eq!(levenshtein("xyzzy", "hello"), 5);
    assert_eq!(anls("xyzzy", &["hello"], 0.5).unwrap(), 0.0);
    assert_eq!(anls("  HeLLo ", &["hello"], 0.5).unwrap(), 1.0);
    assert_eq!(levenshtein("", "abc"), 3);
    assert_eq!(anls("abcd", &["abxy"], 0.5).unwrap(), 0.5);
    assert_eq!(anls("helo", &["nothing", "hello"], 0.5).unwrap(), 0.8);
    assert_eq!(anls("", &[""], 0.5).unwrap(), 1.0);
}

#[test]
fn accuracy_counts_exact_class_matches() {
    let doc = |c: &str| DocTree::from_pairs([("class", Value::text(c))]);
    let gts = [doc("memo"), doc("letter"), doc("memo"), doc("invoice")];
    let preds = [doc("memo"), doc("letter"), doc("letter"), doc("invoice")];
    assert_eq!(classification_accuracy(&preds, &gts, "class").unwrap(), 0.75);
    assert!(classification_accuracy(&preds[..1], &gts, "class").is_err());
}
