mod common;

use common::max_abs_diff;
use mlgame_core::game::random_game;
use mlgame_core::tcp::{TcpInstance, DEFAULT_BIG_TENSOR_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shapes() -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 1..=11 {
        for b in 1..=12 - a {
            out.push(vec![a, b]);
        }
    }
    for a in 1..=4 {
        for b in 1..=4 {
            for c in 1..=4 {
                out.push(vec![a, b, c]);
            }
        }
    }
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                for d in 1..=3 {
                    out.push(vec![a, b, c, d]);
                }
            }
        }
    }
    out
}

#[test]
fn big_tensor_power_contraction_matches_block_f() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shapes = shapes();
    assert_eq!(shapes.len(), 66 + 64 + 81);
    for (i, dims) in shapes.iter().enumerate() {
        let t = TcpInstance::new(random_game::<f64>(dims, i as u64).unwrap());
        assert!(t.dim() <= 12);
        let big = t.assemble_big_tensor(DEFAULT_BIG_TENSOR_BUDGET).unwrap();
        assert!(big.shape().is_cubical() && big.order() == dims.len());
        let q = t.q();
        for _ in 0..50 {
            let y: Vec<f64> = (0..t.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let via_big: Vec<f64> = big
                .power_contract(&y)
                .unwrap()
                .iter()
                .zip(&q)
                .map(|(a, b)| a + b)
                .collect();
            let err = max_abs_diff(&via_big, &t.eval_f(&y).unwrap());
            assert!(err <= 1e-12, "{dims:?}: {err:e}");
        }
    }
}

#[test]
fn big_tensor_has_at_most_one_entry_per_payoff() {
    for dims in [vec![2, 3], vec![2, 2, 2], vec![1, 2, 1, 2]] {
        let g = random_game::<f64>(&dims, 3).unwrap();
        let per_player: usize = dims.iter().product();
        let big = TcpInstance::new(g).assemble_big_tensor(1 << 20).unwrap();
        assert_eq!(big.count_nonzero(), dims.len() * per_player);
    }
}
