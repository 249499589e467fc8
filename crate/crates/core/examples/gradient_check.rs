//! Analytic gradients against central finite differences for every
//! variant, activation and loss.

use cdae::autoencoder::gradcheck::{run_gradcheck, GradCheckConfig};

fn main() {
    let cfg = GradCheckConfig {
        restarts: 5,
        ..GradCheckConfig::default()
    };
    let report = run_gradcheck(&cfg).expect("valid config");
    for case in report.cases.iter().filter(|c| c.restart == 0) {
        println!(
            "{:<4} {:<7?} {:<12?} worst {} rel err {:.2e}",
            case.variant.label(),
            case.activation,
            case.loss,
            case.worst.slot,
            case.worst.relative_error
        );
    }
    println!(
        "{} cases, max relative error {:.2e}, passed = {}",
        report.cases.len(),
        report.max_relative_error(),
        report.passed()
    );
}
