//! One-off sweep over the experiment matrix; prints the observed values
//! the acceptance thresholds are pinned against.

use num_complex::Complex64;
use substkit::arith::{
    correlate, kbsz_cross, momo_short_intervals, sign_code, ArithmeticFunction, BlockSpec,
    Observable,
};
use substkit::fixtures::fixture;
use substkit::joinings::order_and_rename;
use substkit::structure::{dw_estimate, wrap_profile};

fn main() {
    let n: u64 = 10_000_000;
    let t0 = std::time::Instant::now();
    let mu = ArithmeticFunction::moebius(n as usize).unwrap();
    let lam = ArithmeticFunction::liouville(n as usize).unwrap();
    println!("sieves built in {:?}", t0.elapsed());

    // observables
    let rs = fixture("rudin_shapiro").unwrap();
    let rs_oj = order_and_rename(&rs).unwrap();
    let rs_obs = sign_code(&rs_oj.fixed_point_handle().unwrap(), &[1, -1, 1, -1])
        .unwrap()
        .into_mean_zero(0)
        .unwrap();

    let tm = fixture("thue_morse").unwrap();
    let tm_obs = sign_code(&tm.find_fixed_seed().unwrap(), &[1, -1])
        .unwrap()
        .into_mean_zero(0)
        .unwrap();

    let bij = fixture("bijective3").unwrap();
    let bij_obs = Observable::code1(
        bij.find_fixed_seed().unwrap(),
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .unwrap()
    .into_mean_zero(0)
    .unwrap();

    let bs = fixture("baum_sweet").unwrap();
    let bs_obs = sign_code(&bs.find_fixed_seed().unwrap(), &[1, 1, -1, -1])
        .unwrap()
        .into_mean_zero(10_000_000)
        .unwrap();
    println!("bs mean offset: {}", bs_obs.mean_offset());

    let obs_list: [(&str, &Observable); 4] = [
        ("rudin_shapiro", &rs_obs),
        ("bijective3", &bij_obs),
        ("thue_morse", &tm_obs),
        ("baum_sweet", &bs_obs),
    ];
    for (name, obs) in obs_list {
        for (fname, f) in [("moebius", &mu), ("liouville", &lam)] {
            let t = std::time::Instant::now();
            let rep = correlate(obs, f, n, &[10_000, 100_000, 1_000_000, n], 8).unwrap();
            let vals: Vec<String> = rep
                .checkpoints
                .iter()
                .zip(&rep.means)
                .map(|(c, z)| format!("{c}:{:.6}", z.norm()))
                .collect();
            println!("{name} vs {fname}: {} ({:?})", vals.join(" "), t.elapsed());
        }
    }

    // kbsz on the renamed Rudin-Shapiro observable
    let t = std::time::Instant::now();
    let rep = kbsz_cross(&rs_obs, 31, 37, 1_000_000, &[10_000, 100_000, 1_000_000], 8).unwrap();
    let vals: Vec<String> = rep
        .checkpoints
        .iter()
        .zip(&rep.means)
        .map(|(c, z)| format!("{c}:{:.6}", z.norm()))
        .collect();
    println!("kbsz rs (31,37): {} ({:?})", vals.join(" "), t.elapsed());

    // wrap ratios for the synchronizing fixture, raw and for the cube
    let wp = wrap_profile(&bs, 24).unwrap();
    println!(
        "bs ratios k=4,8,12,16,20,24: {:.4} {:.4} {:.4} {:.4} {:.4} {:.4}",
        wp.ratios[3], wp.ratios[7], wp.ratios[11], wp.ratios[15], wp.ratios[19], wp.ratios[23]
    );
    let bs3 = bs.power(3).unwrap();
    let wp3 = wrap_profile(&bs3, 8).unwrap();
    println!("bs^3 ratio at k=8: {:.6}", wp3.ratios[7]);

    // dW against the lambda^4-periodic approximant
    let handle = bs.find_fixed_seed().unwrap();
    let period = bs.lambda().pow(4);
    let len = bs.lambda().pow(6);
    let u = handle.prefix(len).unwrap();
    let approx: Vec<_> = (0..len).map(|i| u[i % period]).collect();
    let est = dw_estimate(&u, &approx, period).unwrap();
    println!(
        "bs dW estimate: {est:.6}, 1 - l4/lambda^4 = {:.6}",
        1.0 - wp.ratios[3]
    );
    // larger horizons for the same comparison
    for k in [5usize, 6] {
        let period = bs.lambda().pow(k as u32);
        let len = bs.lambda().pow(k as u32 + 2);
        let u = handle.prefix(len).unwrap();
        let approx: Vec<_> = (0..len).map(|i| u[i % period]).collect();
        let est = dw_estimate(&u, &approx, period).unwrap();
        println!(
            "bs dW at period lambda^{k}: {est:.6}, 1 - ratio = {:.6}",
            1.0 - wp.ratios[k - 1]
        );
    }

    // momo for moebius on k^2 blocks
    let t = std::time::Instant::now();
    let rep = momo_short_intervals(None, &mu, BlockSpec::Squares, n, 8).unwrap();
    println!(
        "momo moebius k^2, bK={}: {:.6} ({:?})",
        rep.b_last,
        rep.value,
        t.elapsed()
    );
    let one = ArithmeticFunction::dirichlet(1, 0).unwrap();
    let rep = momo_short_intervals(None, &one, BlockSpec::Squares, n, 8).unwrap();
    println!("momo constant-1: {}", rep.value);

    println!("total {:?}", t0.elapsed());
}
