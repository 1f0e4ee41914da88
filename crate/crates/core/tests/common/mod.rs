#![allow(dead_code)]

use mlgame_core::game::{MixedProfile, MultilinearGame};
use mlgame_core::tensor::DenseTensor;

pub fn battle_of_sexes() -> MultilinearGame<f64> {
    MultilinearGame::from_flat(
        vec![2, 2],
        vec![vec![2.0, -1.0, -1.0, 1.0], vec![1.0, -1.0, -1.0, 2.0]],
    )
    .unwrap()
}

pub const BOS_Y: [f64; 4] = [3.0, 2.0, 2.0, 3.0];

pub fn bos_profile() -> MixedProfile<f64> {
    MixedProfile::new(vec![vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap()
}

// slices [i3][i1][i2]
const THREE_PLAYER: [[[[f64; 3]; 2]; 2]; 3] = [
    [
        [[0.0605, 0.5269, 0.6569], [0.3993, 0.4168, 0.6280]],
        [[0.2920, 0.0155, 0.1672], [0.4317, 0.9841, 0.1062]],
    ],
    [
        [[0.3724, 0.4897, 0.9516], [0.1981, 0.3395, 0.9203]],
        [[0.0527, 0.2691, 0.5479], [0.7379, 0.4228, 0.9427]],
    ],
    [
        [[0.4177, 0.3015, 0.6663], [0.9831, 0.7011, 0.5391]],
        [[0.6981, 0.1781, 0.9991], [0.6665, 0.1280, 0.1711]],
    ],
];

/// Three-player game with strategy counts (2, 3, 2).
pub fn three_player() -> MultilinearGame<f64> {
    let payoffs = THREE_PLAYER
        .iter()
        .map(|a| DenseTensor::from_fn(vec![2, 3, 2], |i| a[i[2]][i[0]][i[1]]).unwrap())
        .collect();
    MultilinearGame::new(payoffs).unwrap()
}

pub const THREE_PLAYER_Y: [f64; 7] = [0.6235, 0.0, 3.8396, 0.0, 0.0, 4.3070, 0.0];
pub const THREE_PLAYER_S: [f64; 7] = [0.0, 5.6024, 0.0, 0.3149, 1.5553, 0.0, 0.6711];

pub fn three_player_profile() -> MixedProfile<f64> {
    MixedProfile::pure(&[2, 3, 2], &[0, 0, 0]).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Shapes used by the property suites, `n ∈ {2, 3, 4}`.
pub const SHAPES: [&[usize]; 9] = [
    &[2, 2],
    &[3, 4],
    &[5, 2],
    &[2, 3, 2],
    &[3, 3, 3],
    &[4, 2, 3],
    &[2, 2, 2, 2],
    &[3, 2, 2, 3],
    &[2, 3, 2, 2],
];
