#![allow(dead_code)]

pub mod oracle;
pub mod reader;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tireplan::instance::{generate, SizeSpec};
use tireplan::Instance;

/// Seeded instance with at most 3 items, 2 presses and 5 periods, two demand
/// classes, small enough for [`oracle::enumerate`].
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let items = rng.gen_range(1..=3);
        let presses = rng.gen_range(1..=2);
        let periods = rng.gen_range(3..=5);
        if ((items + 1) as f64).powi((presses * periods) as i32) > 40_000.0 {
            continue;
        }
        let mut spec = SizeSpec::small(items, presses, periods);
        spec.classes = 2;
        spec.tires = rng.gen_range(1..=items);
        spec.load = rng.gen_range(0.5..1.3);
        spec.eligibility_density = 0.75;
        if let Ok(inst) = generate(rng.gen(), &spec) {
            return inst;
        }
    }
}

/// Small generated instance for the solver comparisons.
pub fn small_instance(seed: u64, items: usize, presses: usize) -> Instance {
    let mut spec = SizeSpec::small(items, presses, 7);
    spec.tires = (items * 3 / 4).max(1);
    spec.load = 1.0;
    generate(seed, &spec).expect("small instance")
}
