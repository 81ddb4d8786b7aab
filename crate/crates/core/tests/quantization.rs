use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use torus_micro::harness::random_symbol;
use torus_micro::linalg::spectral_norm;
use torus_micro::quantization::operator_matrix;
use torus_micro::ModeBox;

// Truncated operator norm against the sampled seminorm, with the constant
// calibrated once at 1.
#[test]
fn calderon_vaillancourt_bound_holds_with_unit_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for d in 1..=2 {
        let n = if d == 1 { 12 } else { 5 };
        for _ in 0..8 {
            let a = random_symbol(d, None, &mut rng);
            for h in [1.0 / 4.0, 1.0 / 8.0] {
                let norm = spectral_norm(&operator_matrix(&a, h, &ModeBox::cube(d, n)));
                let bound = a.cv_seminorm(d + 1, h * n as f64, 9, 16);
                worst = worst.max(norm / bound);
            }
        }
    }
    assert!(worst <= 1.0, "operator norm / seminorm reached {worst}");
}
