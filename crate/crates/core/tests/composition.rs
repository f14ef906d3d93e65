mod common;

use marble_core::analysis::{enumerate, row_bits, DEFAULT_ARITY_CAP};
use marble_core::gates::library;
use marble_core::netlist::{elaborate, parse, print_canonical, validate, ElaborateOptions};
use marble_core::CollisionMode;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bounce_and_merge_agree_with_the_oracle(seed in any::<u64>()) {
        let comp = common::random_composition(&mut ChaCha8Rng::seed_from_u64(seed), 0);
        prop_assert!(validate(&comp.ast, library()).is_empty());
        let circuit = elaborate(&comp.ast, library(), ElaborateOptions::default()).unwrap();

        let bounce = enumerate(&circuit, CollisionMode::Bounce, DEFAULT_ARITY_CAP).unwrap();
        let merge = enumerate(&circuit, CollisionMode::Merge, DEFAULT_ARITY_CAP).unwrap();
        prop_assert_eq!(&bounce.table, &merge.table);
        for (i, row) in bounce.table.rows.iter().enumerate() {
            prop_assert_eq!(row, &comp.oracle(&row_bits(i, comp.inputs)), "row {}", i);
        }
        for l in bounce.ledgers.iter().chain(&merge.ledgers) {
            prop_assert!(l.is_balanced(), "{}", l);
        }
    }

    #[test]
    fn generated_netlists_roundtrip(seed in any::<u64>()) {
        let comp = common::random_composition(&mut ChaCha8Rng::seed_from_u64(seed), 1);
        let text = print_canonical(&comp.ast);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &comp.ast);
        prop_assert_eq!(print_canonical(&back), text);
    }
}
