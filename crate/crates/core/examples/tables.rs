//! Prints background statistics and rare-event probabilities for the seat and
//! deck-seat reference systems with a cubic attachment.

use std::time::Instant;

use pds_core::{estimate, Attachment, BackgroundSpectrum, ForcingModel, ImpulsePattern, Oscillator, PdsOptions, SystemModel};

fn main() -> pds_core::Result<()> {
    let forcing = ForcingModel::new(BackgroundSpectrum::new(1.582e-4, 1.0)?, 5000.0, 0.1, 0.0141, ImpulsePattern::PrimaryOnly)?;
    let systems = [
        ("seat", SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), Some(Attachment::cubic_nes(0.05, 0.021, 3.461)))?),
        (
            "deck-seat",
            SystemModel::deck_seat(
                Oscillator::new(1.0, 0.01, 1.0),
                Oscillator::new(0.05, 0.1, 1.0),
                Some(Attachment::cubic_nes(0.05, 0.035, 5.860)),
            )?,
        ),
    ];
    for (name, model) in systems {
        let t = Instant::now();
        let est = estimate(&model, &forcing, &model.quantities(), &PdsOptions::default())?;
        println!("{name}: sigma_eta = {:.5} ({:.2?})", est.eta.sigma(), t.elapsed());
        for p in &est.profiles {
            println!("  P_r[{}] = {:.5}", p.quantity, p.probability);
        }
    }
    Ok(())
}
