use std::io::Write;
use std::process::{Command, Stdio};

use anamorph::protocol::{decode_response, encode_hello, encode_request, encode_response, Frame};
use anamorph_core::oracle::{BBox, Detection, DetectionSet, OracleError};
use proptest::prelude::*;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn detection() -> impl Strategy<Value = Detection> {
    (
        "[a-z][a-z_ ]{0,11}",
        prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0],
        (0.0f64..0.9, 0.0f64..0.9),
        (0.0f64..1.0, 0.0f64..1.0),
    )
        .prop_map(|(class, conf, (x, y), (fw, fh))| {
            // sizes chosen as a fraction of the room left, so the box stays inside
            let w = ((1.0 - x) * fw).max(1e-6);
            let h = ((1.0 - y) * fh).max(1e-6);
            Detection::new(class, conf, BBox { x, y, w, h }).unwrap()
        })
}

fn detection_set() -> impl Strategy<Value = DetectionSet> {
    (proptest::collection::vec(detection(), 0..6), "[ -~]{0,16}")
        .prop_map(|(detections, image_id)| DetectionSet { detections, image_id })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn decode_inverts_encode(set in detection_set()) {
        let bytes = encode_response(&set);
        prop_assert_eq!(bytes.iter().filter(|&&b| b == b'\n').count(), 1);
        prop_assert_eq!(decode_response(&bytes).unwrap(), set);
    }

    #[test]
    fn truncated_frames_are_rejected(set in detection_set(), cut in 0.0f64..1.0) {
        let bytes = encode_response(&set);
        // drop the newline and at least the closing brace
        let keep = ((bytes.len() - 2) as f64 * cut) as usize;
        let r = decode_response(&bytes[..keep]);
        prop_assert!(matches!(r, Err(OracleError::Protocol(_))));
    }
}

#[test]
fn golden_result_frame() {
    let bytes = std::fs::read(format!("{FIXTURES}/golden_result.jsonl")).unwrap();
    let expect = DetectionSet {
        image_id: "r00003".into(),
        detections: vec![
            Detection::new("car", 0.8125, BBox { x: 0.375, y: 0.5, w: 0.25, h: 0.125 }).unwrap(),
            Detection::new("truck", 0.0625, BBox { x: 0.0, y: 0.0, w: 1.0, h: 1.0 }).unwrap(),
        ],
    };
    assert_eq!(decode_response(&bytes).unwrap(), expect);
    assert_eq!(encode_response(&expect), bytes);
}

/// Replays the recorded session: the client frames must match byte for byte, and the stub's
/// answers too.
#[test]
fn stub_transcript_is_byte_exact() {
    let transcript = std::fs::read_to_string(format!("{FIXTURES}/stub_transcript.txt")).unwrap();
    let mut sent = Vec::new();
    let mut expected = String::new();
    for line in transcript.lines() {
        if let Some(req) = line.strip_prefix("> ") {
            sent.push(format!("{req}\n"));
        } else if let Some(resp) = line.strip_prefix("< ") {
            expected.push_str(resp);
            expected.push('\n');
        }
    }
    assert_eq!(sent.len(), 11);
    assert_eq!(sent[0].as_bytes(), encode_hello());
    for (i, req) in sent[1..].iter().enumerate() {
        let id = format!("g{i:05}");
        assert_eq!(req.as_bytes(), encode_request(&format!("/tmp/anamorph/{id}.png"), &id));
    }

    let mut child = Command::new("python3")
        .arg(format!("{FIXTURES}/stub_bridge.py"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("python3 is available");
    child.stdin.take().unwrap().write_all(sent.concat().as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);

    let answers: Vec<&str> = expected.lines().collect();
    assert!(matches!(Frame::decode(answers[0].as_bytes()).unwrap(), Frame::Ready { .. }));
    for (i, a) in answers[1..].iter().enumerate() {
        assert_eq!(decode_response(a.as_bytes()).unwrap(), DetectionSet::empty(format!("g{i:05}")));
    }
}
