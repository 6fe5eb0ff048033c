use ocular_core::eyestate::*;
use ocular_core::imagecore::synth::synth_eye;
use ocular_core::imagecore::{add_noise, GrayImage, NoiseSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus(rng: &mut ChaCha8Rng, skew: bool) -> Vec<(EyeState, Vec<(f64, GrayImage)>)> {
    let bands = [
        (EyeState::Open, 0.0f64, 0.5f64),
        (EyeState::PartiallyClosed, 0.6, 0.8),
        (EyeState::Closed, 0.9, 1.0),
    ];
    let mut out = Vec::new();
    let mut seed = 0u64;
    for (state, lo, hi) in bands {
        let mut images = Vec::new();
        for _ in 0..70 {
            let u: f64 = rng.random_range(0.0..1.0);
            let lid = if skew {
                match state {
                    EyeState::Open => lo + (hi - lo) * u * u,
                    EyeState::Closed => hi - (hi - lo) * u * u,
                    _ => lo + (hi - lo) * u,
                }
            } else {
                lo + (hi - lo) * u
            };
            let cx = 24.0 + rng.random_range(-1.5..1.5);
            let cy = 12.0 + rng.random_range(-1.0..1.0);
            let pr = rng.random_range(4.0..5.0);
            let ir = pr + rng.random_range(3.5..4.5);
            let (img, _) = synth_eye(48, 24, (cx, cy), pr, ir, lid);
            let s2 = img.variance();
            images.push((lid, add_noise(&img, &NoiseSpec::new(s2 / 100.0, 707_000 + seed))));
            seed += 1;
        }
        out.push((state, images));
    }
    out
}

fn main() {
    for skew in [false, true] {
        let mut rng = ChaCha8Rng::seed_from_u64(707);
        let train = corpus(&mut rng, skew);
        let plain: Vec<(EyeState, Vec<GrayImage>)> =
            train.iter().map(|(s, v)| (*s, v.iter().map(|(_, im)| im.clone()).collect())).collect();
        for domain in [TransformDomain::Dct, TransformDomain::Dft] {
            let bank = synthesize_otmach(&plain, &OtMachParams::default(), domain).unwrap();
            let mut miss = 0;
            let mut shown = 0;
            for (label, images) in &train {
                for (lid, img) in images {
                    let r = classify(img, &bank).unwrap();
                    if r.state != *label {
                        miss += 1;
                        if shown < 3 && skew {
                            println!("  {domain:?} true {label} lid {lid:.3} -> {} votes:", r.state);
                            for s in &r.scores {
                                println!("    {}: psr {:.2} mi {:.4} fr {:.1}", s.label, s.psr, s.mi, s.fr);
                            }
                            shown += 1;
                        }
                    }
                }
            }
            println!("skew={skew} {domain:?}: train misses {miss}/210");
        }
    }
}
