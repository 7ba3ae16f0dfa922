//! How the background score reshapes class scores.

use oztal::classify::{mixing_weight, refine_scores, ScoreVector};

fn main() -> oztal::Result<()> {
    println!("{:>6} {:>6} {:>6} {:>8}", "k", "r", "alpha", "y");
    for (k, r) in [
        (30.0, 10.0),
        (20.0, 0.0),
        (15.0, 15.0),
        (5.0, 20.0),
        (60.0, 25.0),
        (12.0, 40.0),
    ] {
        let y = refine_scores(&ScoreVector::new(0, vec![k])?, r)?.values[0];
        println!("{k:>6.1} {r:>6.1} {:>6.3} {y:>8.2}", mixing_weight(k, r));
    }

    // a frame that looks like every class a little and like background a lot
    let k = ScoreVector::new(0, vec![24.0, 18.0, 11.0])?;
    let y = refine_scores(&k, 30.0)?;
    let tau = 10.0;
    println!("\nk = {:?}, r = 30", k.values);
    println!("y = {:?}", y.values);
    println!(
        "above tau={tau}: raw {} classes, refined {} classes",
        k.values.iter().filter(|v| **v > tau).count(),
        y.values.iter().filter(|v| **v > tau).count()
    );
    Ok(())
}
