use rotlab::extract::{check_choice_extraction, check_sender_extraction};
use rotlab::prob::ratio;
use rotlab::protolib::{erasure_rot, passthrough_rot};

const BOUND: u64 = 100_000_000;

#[test]
fn secure_protocols_never_classify_both() {
    for p in [passthrough_rot(), erasure_rot(6, 2).unwrap()] {
        let c = check_choice_extraction(&p, &ratio(1, 1), BOUND).unwrap();
        assert_eq!(c.both, 0, "{}", p.label());
    }
}

#[test]
fn erasure_sender_extraction_is_exact() {
    // Alice's outputs are XORs over the announced sets, which the transcript carries
    let p = erasure_rot(6, 2).unwrap();
    let s = check_sender_extraction(&p, &ratio(1, 1), BOUND).unwrap();
    assert_eq!(s.success, ratio(1, 1));
}

#[test]
fn erasure_choice_extraction_agrees_on_delivered_runs() {
    let p = erasure_rot(4, 1).unwrap();
    let c = check_choice_extraction(&p, &ratio(1, 1), BOUND).unwrap();
    assert_eq!(c.eps, ratio(0, 1));
    assert_eq!(c.last_message_violations + c.equivocation_violations, 0);
}
