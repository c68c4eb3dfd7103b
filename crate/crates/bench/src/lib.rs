//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sapsom::{EnvState, MapGeometry, SomMap, TransitionModel};

pub struct Fixture {
    pub map: SomMap,
    pub model: TransitionModel,
    pub inputs: Vec<Vec<f64>>,
}

/// A random `rows x cols` map over cart-pole-like states with sparse random transitions.
pub fn fixture(rows: usize, cols: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = MapGeometry::new(rows, cols).expect("non-empty grid");
    let map = SomMap::random_uniform(g, EnvState::DIM, 1.0, &mut rng);
    let n = g.units();
    let matrices = (0..2)
        .map(|_| {
            (0..n * n)
                .map(|_| {
                    if rng.random_bool(0.05) {
                        rng.random_range(0.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let model = TransitionModel::from_matrices(n, matrices).expect("square matrices");
    let inputs = (0..64)
        .map(|_| (0..EnvState::DIM).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Fixture { map, model, inputs }
}
