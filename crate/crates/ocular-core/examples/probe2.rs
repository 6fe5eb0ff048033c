use ocular_core::imagecore::{add_noise, GrayImage, NoiseSpec};
use ocular_core::noiseblind::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn markov_field(rng: &mut ChaCha8Rng, rho_x: f64, rho_y: f64) -> GrayImage {
    let (w, h) = (128usize, 128usize);
    let mut field = vec![0.0f64; w * h];
    for v in field.iter_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    for y in 0..h {
        for x in 1..w {
            field[y * w + x] = rho_x * field[y * w + x - 1] + (1.0 - rho_x * rho_x).sqrt() * field[y * w + x];
        }
    }
    for x in 0..w {
        for y in 1..h {
            field[y * w + x] = rho_y * field[(y - 1) * w + x] + (1.0 - rho_y * rho_y).sqrt() * field[y * w + x];
        }
    }
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    let var = field.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / field.len() as f64;
    let scale = 40.0 / var.sqrt();
    GrayImage::from_fn(w, h, |x, y| 128.0 + (field[y * w + x] - mean) * scale)
}


fn with_flats(rng: &mut ChaCha8Rng, rho_x: f64, rho_y: f64) -> GrayImage {
    let mut img = markov_field(rng, rho_x, rho_y);
    for _ in 0..3 {
        let rw = rng.random_range(20..40);
        let rh = rng.random_range(10..20);
        let x0 = rng.random_range(0..128 - rw);
        let y0 = rng.random_range(0..128 - rh);
        let level: f64 = rng.random_range(60.0..200.0);
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                img.set(x, y, level);
            }
        }
    }
    img
}

fn run(rho_x: f64, rho_y: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cfg = EstimatorConfig { region_size: 4, ..EstimatorConfig::default() };
    let methods = [EstimatorMethod::M1, EstimatorMethod::M2, EstimatorMethod::M3, EstimatorMethod::M4, EstimatorMethod::M5];
    let mut ape: Vec<Vec<f64>> = vec![Vec::new(); 5];
    let mut m1_snr: Vec<f64> = Vec::new();
    for i in 0..30u64 {
        let img = with_flats(&mut rng, rho_x, rho_y);
        let s2 = img.variance();
        for db in [0.0f64, 10.0, 20.0, 30.0] {
            let n2 = s2 / 10f64.powf(db / 10.0);
            let noisy = add_noise(&img, &NoiseSpec::new(n2, 404_000 + i * 7 + db as u64));
            for (mi, m) in methods.iter().enumerate() {
                let est = estimate(&noisy, *m, &cfg).unwrap();
                ape[mi].push(100.0 * (est.sigma_s2 - s2).abs() / s2);
                if mi == 0 && db >= 20.0 {
                    m1_snr.push(snr_error_pct(s2, est.sigma_s2 - s2, n2).abs());
                }
            }
        }
    }
    let median = |v: &mut Vec<f64>| { v.sort_by(|a,b| a.partial_cmp(b).unwrap()); v[v.len()/2] };
    let meds: Vec<f64> = ape.iter_mut().map(median).collect();
    println!(
        "rho=({rho_x},{rho_y}): M1 {:.3} M2 {:.3} M3 {:.3} M4 {:.3} M5 {:.3} | M1 SNRerr {:.1}%",
        meds[0], meds[1], meds[2], meds[3], meds[4], median(&mut m1_snr)
    );
}

fn main() {
    run(0.99, 0.95);
    run(0.995, 0.97);
    run(0.995, 0.95);
    run(0.998, 0.97);
}
