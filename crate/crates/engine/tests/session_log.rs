use cogspeech::session_log::{log_path, read_log, SessionLog};
use cogspeech_core::{BiomarkerScoreSet, EventPayload, Speaker, UtteranceRecord};
use proptest::prelude::*;

fn payload() -> impl Strategy<Value = EventPayload> {
    let text = "[ -~\\n\"\\\\é]{0,40}";
    prop_oneof![
        (text, 0i64..100_000, 1i64..5_000).prop_map(|(t, a, d)| {
            EventPayload::Utterance(UtteranceRecord::new("rt", Speaker::Patient, format!("w{t}"), a, a + d).unwrap())
        }),
        (0i64..1_000_000, proptest::array::uniform6(proptest::option::of(0.0f64..=1.0)))
            .prop_map(|(ts, s)| EventPayload::Scores(BiomarkerScoreSet::new(ts, s).unwrap())),
        text.prop_map(|text| EventPayload::Response { text }),
        ("[A-Z_]{1,12}", text).prop_map(|(code, message)| EventPayload::Error { code, message }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reading_back_reproduces_every_event(events in proptest::collection::vec((payload(), 0u64..1_000), 0..30)) {
        let dir = tempfile::tempdir().unwrap();
        let mut log = SessionLog::open(dir.path(), "rt", true).unwrap();
        let mut t = 1_700_000_000_000u64;
        let written: Vec<_> = events
            .into_iter()
            .map(|(p, dt)| {
                t += dt;
                log.append_at(p, t).unwrap()
            })
            .collect();
        drop(log);
        prop_assert_eq!(read_log(&log_path(dir.path(), "rt").unwrap()).unwrap(), written);
    }
}
