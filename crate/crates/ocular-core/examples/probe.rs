use ocular_core::eyestate::*;
use ocular_core::imagecore::synth::synth_eye;
use ocular_core::imagecore::{add_noise, GrayImage, NoiseSpec};
use ocular_core::noiseblind::*;
use ocular_core::ocular::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rich_image(rng: &mut ChaCha8Rng) -> GrayImage {
    let (w, h) = (128usize, 128usize);
    // several oriented cosine components, horizontally smooth
    let comps: Vec<(f64, f64, f64, f64)> = (0..8)
        .map(|_| (
            rng.random_range(5.0..20.0),             // amplitude
            rng.random_range(0.3..1.5),              // fx cycles
            rng.random_range(1.0..6.0),              // fy cycles
            rng.random_range(0.0..std::f64::consts::TAU),
        ))
        .collect();
    let mut img = GrayImage::from_fn(w, h, |x, y| {
        let mut v = 128.0;
        for (a, fx, fy, ph) in &comps {
            v += a * (std::f64::consts::TAU * (fx * x as f64 + fy * y as f64) / w as f64 + ph).cos();
        }
        v
    });
    for _ in 0..3 {
        let rw = rng.random_range(30..70);
        let rh = rng.random_range(6..16);
        let x0 = rng.random_range(0..w - rw);
        let y0 = rng.random_range(0..h - rh);
        let delta: f64 = rng.random_range(20.0..50.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        for y in y0..y0 + rh { for x in x0..x0 + rw {
            let v = (img.get(x, y) + delta).clamp(5.0, 250.0); img.set(x, y, v);
        }}
    }
    img
}

fn main() {
    // criterion 4 tuning
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cfg = EstimatorConfig { region_size: 4, ..EstimatorConfig::default() };
    let methods = [EstimatorMethod::M1, EstimatorMethod::M2, EstimatorMethod::M3, EstimatorMethod::M4, EstimatorMethod::M5];
    let mut ape: Vec<Vec<f64>> = vec![Vec::new(); 5];
    for i in 0..20 {
        let img = rich_image(&mut rng);
        let s2 = img.variance();
        for db in [0.0f64, 10.0, 20.0, 30.0] {
            let n2 = s2 / 10f64.powf(db / 10.0);
            let noisy = add_noise(&img, &NoiseSpec::new(n2, 404_000 + i * 7 + db as u64));
            for (mi, m) in methods.iter().enumerate() {
                let est = estimate(&noisy, *m, &cfg).unwrap();
                ape[mi].push(100.0 * (est.sigma_s2 - s2).abs() / s2);
            }
        }
    }
    let median = |v: &mut Vec<f64>| { v.sort_by(|a,b| a.partial_cmp(b).unwrap()); v[v.len()/2] };
    for (mi, v) in ape.iter_mut().enumerate() {
        println!("M{} median APE {:.3}%", mi + 1, median(v));
    }

    // criterion 7: find misclassified training lids
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let bands = [(EyeState::Open, 0.0, 0.5), (EyeState::PartiallyClosed, 0.6, 0.8), (EyeState::Closed, 0.9, 1.0)];
    let mut train: Vec<(EyeState, Vec<(f64, GrayImage)>)> = Vec::new();
    let mut seed = 0u64;
    for (state, lo, hi) in bands {
        let mut images = Vec::new();
        for _ in 0..70 {
            let lid = rng.random_range(lo..=hi);
            let cx = 24.0 + rng.random_range(-1.5..1.5);
            let cy = 12.0 + rng.random_range(-1.0..1.0);
            let pr = rng.random_range(4.0..5.0);
            let ir = pr + rng.random_range(3.5..4.5);
            let (img, _) = synth_eye(48, 24, (cx, cy), pr, ir, lid);
            let s2 = img.variance();
            images.push((lid, add_noise(&img, &NoiseSpec::new(s2 / 100.0, 707_000 + seed))));
            seed += 1;
        }
        train.push((state, images));
    }
    let plain: Vec<(EyeState, Vec<GrayImage>)> = train.iter().map(|(s, v)| (*s, v.iter().map(|(_, im)| im.clone()).collect())).collect();
    let bank = synthesize_otmach(&plain, &OtMachParams::default(), TransformDomain::Dct).unwrap();
    let mut miss = 0;
    for (label, images) in &train {
        for (lid, img) in images {
            let got = classify(img, &bank).unwrap().state;
            if got != *label { println!("train misclass: true {label} lid {lid:.3} -> {got}"); miss += 1; }
        }
    }
    println!("train misses: {miss}/210");

    // criterion 9: diameter errors
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let params = OcularParams { radial_zone_frac: (0.05, 0.36), ..OcularParams::default() };
    let mut errs: Vec<f64> = Vec::new();
    for i in 0..200 {
        let unoccluded = i % 2 == 0;
        let lid = if unoccluded { 0.0 } else { rng.random_range(0.05..0.40) };
        let cx = 32.0 + rng.random_range(-6.0..6.0);
        let cy = 16.0 + rng.random_range(-2.5..2.5);
        let pr = rng.random_range(4.0..7.0);
        let ir = pr + rng.random_range(4.0..7.0);
        let (clean, truth) = synth_eye(64, 32, (cx, cy), pr, ir, lid);
        let s2 = clean.variance();
        let img = add_noise(&clean, &NoiseSpec::new(s2 / 100.0, 909_000 + i as u64));
        if !unoccluded { continue; }
        let com = pupil_center(&img, &params).unwrap();
        let geom = pupil_diameter(&img, &com, &params).unwrap();
        let rel = (geom.diameter - 2.0 * pr).abs() / (2.0 * pr);
        errs.push(rel);
        if rel > 0.10 {
            let tl = PupilLocation { x: truth.pupil_center.0, y: truth.pupil_center.1 };
            println!("diam fail i={i}: pr {pr:.2} ir {ir:.2} got {:.2} rel {rel:.3} center_err {:.2}", geom.diameter, com.distance_to(&tl));
        }
    }
    errs.sort_by(|a,b| a.partial_cmp(b).unwrap());
    println!("diam rel err median {:.3} p90 {:.3} max {:.3}", errs[errs.len()/2], errs[(errs.len()*9)/10], errs[errs.len()-1]);
}
