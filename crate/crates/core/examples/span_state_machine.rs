//! Per-class state machine: segments open above the threshold and are
//! emitted on the first step that falls back to or below it.

use oztal::{ScoreVector, SpanStateMachine, TimeBase};

fn main() -> oztal::Result<()> {
    let tau = 10.0;
    // two classes with overlapping activity; class 1 is still open at the end
    let stream = [
        [5.0, 0.0],
        [12.0, 3.0],
        [15.0, 11.0],
        [9.0, 14.0],
        [0.0, 16.0],
        [11.0, 10.5],
    ];
    let mut machine = SpanStateMachine::new(
        2,
        tau,
        TimeBase {
            fps: 30.0,
            stride: 1,
        },
    )?;
    for (t, y) in stream.iter().enumerate() {
        let done = machine.step(t, &ScoreVector::new(t, y.to_vec())?)?;
        println!("t={t} y={y:?} state={:?}", machine.states());
        for a in done {
            println!(
                "    emit class {} [{}, {}] p={:.4}",
                a.class_index, a.start_t, a.end_t, a.confidence
            );
        }
    }
    for a in machine.flush(stream.len() - 1) {
        println!(
            "flush class {} [{}, {}] p={:.4}",
            a.class_index, a.start_t, a.end_t, a.confidence
        );
    }
    Ok(())
}
