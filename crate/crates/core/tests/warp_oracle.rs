//! `apply_homography` against the brute-force resampler in `support/bilinear.rs`.

use anamorph_core::warp::apply_homography;
use anamorph_core::Rgb;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[path = "support/bilinear.rs"]
mod bilinear;

use bilinear::{oracle, random_case};

#[test]
fn matches_brute_force_on_twenty_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let fill = Rgb([7, 200, 33]);
    let mut filled = 0usize;
    for case in 0..20 {
        let (src, hom, dims) = random_case(&mut rng);
        let got = apply_homography(&src, &hom, dims, fill).unwrap();
        let want = oracle(&src, hom.0, dims, fill);
        let mismatches = got.as_raw().iter().zip(&want).filter(|(a, b)| a != b).count();
        assert_eq!(mismatches, 0, "case {case}: {mismatches} channel values differ");
        filled += want.chunks(3).filter(|p| *p == fill.0).count();
    }
    // the random quads overhang the output, so both code paths get exercised
    assert!(filled > 0);
}
