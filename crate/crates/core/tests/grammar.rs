use ludeme::corpus;
use ludeme::grammar::generate::random_tree;
use ludeme::grammar::{parse, parse_bytes, pretty, print, validate, Catalog};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_round_trip(seed: u64) {
        let catalog = Catalog::v1();
        let tree = random_tree(&catalog, &mut ChaCha8Rng::seed_from_u64(seed));
        let text = print(&tree);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &tree);
        prop_assert_eq!(print(&back), text);
        prop_assert_eq!(parse(&pretty(&tree)).unwrap(), tree);
    }

    #[test]
    fn generated_trees_validate(seed: u64) {
        let catalog = Catalog::v1();
        let tree = random_tree(&catalog, &mut ChaCha8Rng::seed_from_u64(seed));
        let report = validate(&tree, &catalog);
        prop_assert!(report.issues.is_empty(), "{:?}", report.issues);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let _ = parse_bytes(&bytes);
    }

    #[test]
    fn mutated_corpus_text_never_panics(game in 0usize..13, at in any::<prop::sample::Index>(), cut in 0usize..20, insert in "[(){}?|:\"a-z0-9 ]{0,6}") {
        let games = corpus::games();
        let text = games[game % games.len()].text.as_bytes();
        let i = at.index(text.len());
        let mut bytes = text[..i].to_vec();
        bytes.extend_from_slice(insert.as_bytes());
        bytes.extend_from_slice(&text[(i + cut).min(text.len())..]);
        if let Ok(tree) = parse_bytes(&bytes) {
            prop_assert_eq!(parse(&print(&tree)).unwrap(), tree);
        }
    }
}
