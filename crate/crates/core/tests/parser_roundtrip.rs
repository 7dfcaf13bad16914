mod common;

use common::{rng, Gen};
use modalg::frontend::parser::{parse_flat, parse_proc, parse_state};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn flat_print_then_parse(seed in any::<u64>(), depth in 0usize..5) {
        let mut r = rng(seed);
        let e = Gen::new(&mut r, &["P", "Q", "R"], &["a", "b"]).flat(depth);
        prop_assert_eq!(parse_flat(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn proc_print_then_parse(seed in any::<u64>(), depth in 0usize..5) {
        let mut r = rng(seed);
        let a = Gen::new(&mut r, &["P", "Q", "R"], &["a", "b"]).proc(depth);
        prop_assert_eq!(parse_proc(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn state_print_then_parse(seed in any::<u64>(), depth in 0usize..5) {
        let mut r = rng(seed);
        let phi = Gen::new(&mut r, &["P", "Q", "R"], &["a", "b"]).state(depth);
        prop_assert_eq!(parse_state(&phi.to_string()).unwrap(), phi);
    }
}

#[test]
fn spec_file_fixtures_parse() {
    for name in ["hc_2col_c4.mod", "hc_2col_k3.mod", "setp.mod"] {
        let spec = modalg::frontend::parser::parse_spec(&common::read_fixture(name)).unwrap();
        spec.valuation().unwrap();
    }
}
