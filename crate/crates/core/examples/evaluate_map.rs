//! mAP at THUMOS14 and ActivityNet thresholds on a hand-made example.

use oztal::eval::{
    mean_ap, Detection, DetectionSet, GroundTruthSegment, GroundTruthSet, VideoAnnotations,
    ACTIVITYNET_TIOU, THUMOS14_TIOU,
};

fn seg(start: f64, end: f64, label: &str) -> GroundTruthSegment {
    GroundTruthSegment {
        start,
        end,
        label: label.into(),
    }
}

fn det(video: &str, label: &str, start: f64, end: f64, score: f64) -> Detection {
    Detection {
        video_id: video.into(),
        label: label.into(),
        start,
        end,
        score,
        emit: end,
    }
}

fn main() -> oztal::Result<()> {
    let mut gt = GroundTruthSet::new();
    gt.insert(
        "video_a",
        VideoAnnotations {
            duration: 60.0,
            segments: vec![seg(2.0, 8.0, "HighJump"), seg(20.0, 31.0, "PoleVault")],
        },
    )?;
    gt.insert(
        "video_b",
        VideoAnnotations {
            duration: 45.0,
            segments: vec![seg(5.0, 9.5, "HighJump"), seg(30.0, 40.0, "HighJump")],
        },
    )?;

    let dets = DetectionSet::new(vec![
        det("video_a", "HighJump", 2.5, 8.0, 31.0),
        det("video_a", "PoleVault", 19.0, 30.0, 27.5),
        det("video_b", "HighJump", 4.0, 10.0, 22.0),
        det("video_b", "HighJump", 12.0, 15.0, 18.0),
        det("video_b", "HighJump", 33.0, 39.0, 12.0),
    ]);

    for thresholds in [&THUMOS14_TIOU[..], &ACTIVITYNET_TIOU[..]] {
        let report = mean_ap(&dets, &gt, thresholds)?;
        print!(
            "{}",
            oztal::commands::format_table(&report.thresholds, &report.map, report.average)
        );
        for (class, aps) in report.classes.iter().zip(&report.per_class) {
            let shown: Vec<String> = aps.iter().map(|a| format!("{:.3}", a)).collect();
            println!("  {class:<10} {}", shown.join(" "));
        }
        println!();
    }
    Ok(())
}
