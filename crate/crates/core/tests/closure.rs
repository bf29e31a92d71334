//! viewset_stat accepts outputs of union/extract/explode and rejects
//! outputs of statistical composition.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vca_testkit::chains::ChainOp;
use vca_testkit::laws;

#[test]
fn random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut closed, mut open) = (0, 0);
    while closed + open < 60 {
        let last = *[ChainOp::Union, ChainOp::Extract, ChainOp::Explode, ChainOp::Stat]
            .choose(&mut rng)
            .unwrap();
        match laws::closure(&mut rng, last) {
            Ok(Some(_)) if last == ChainOp::Stat => open += 1,
            Ok(Some(_)) => closed += 1,
            Ok(None) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(closed > 0 && open > 0);
}
