//! Scratch harness: sweep fusion weights over the benchmark designs and
//! print the summary metrics. Run with --release.

use dtc_core::replicate::{run_replications, Design, HarnessConfig};
use dtc_core::simgen::{ClusterRatios, CovarianceSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    let reps: usize = args
        .get(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let lambdas: Vec<f64> = if args.len() > 3 {
        args[3..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0.0, 0.02, 0.05, 0.1, 0.2]
    };

    let designs: Vec<(&str, Design)> = vec![
        (
            "3d_mu0.8_n50",
            Design::ThreeD {
                n: 50,
                d: 20,
                mu: 0.8,
                ratios: ClusterRatios::Equal,
            },
        ),
        (
            "3d_mu0.6_n100",
            Design::ThreeD {
                n: 100,
                d: 20,
                mu: 0.6,
                ratios: ClusterRatios::Equal,
            },
        ),
        (
            "2d_mu1.2_n50",
            Design::TwoD {
                n: 50,
                d: 20,
                mu: 1.2,
                cov: CovarianceSpec::identity(20),
                ratios: ClusterRatios::Equal,
            },
        ),
        (
            "2d_mu1.0_n50",
            Design::TwoD {
                n: 50,
                d: 20,
                mu: 1.0,
                cov: CovarianceSpec::identity(20),
                ratios: ClusterRatios::Equal,
            },
        ),
    ];

    for (name, design) in designs {
        if which != "all" && !name.contains(which) {
            continue;
        }
        for &lam in &lambdas {
            let mut cfg = HarnessConfig::new(design.clone(), reps, 20260823);
            let (s_def, mut l_def) = design.default_constraints();
            *l_def.last_mut().unwrap() = lam;
            cfg.s = Some(s_def);
            cfg.lambda = Some(l_def);
            match run_replications(&cfg) {
                Ok(s) => println!(
                    "{name} lam={lam}: recovery {:.3} ({:.3})  clustering {:.3} ({:.3})  {:.2}s/rep",
                    s.mean_recovery, s.se_recovery, s.mean_clustering, s.se_clustering, s.mean_seconds
                ),
                Err(e) => println!("{name} lam={lam}: ERROR {e}"),
            }
        }
    }
}
