use dyad::corpus::{
    parse_session, to_json, to_tsv, RapportRating, Relationship, Session, SessionHeader, Speaker,
    StrategyEvent, StrategyKind, Utterance,
};
use proptest::prelude::*;

fn text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            Just("word".to_string()),
            Just("[laughter]".to_string()),
            Just("a\tb".to_string()),
            Just("line\nbreak".to_string()),
            Just("back\\slash".to_string()),
            Just("crlf\r\n".to_string()),
            Just("done.".to_string()),
            "[a-zé?!;,]{0,6}",
        ],
        0..6,
    )
    .prop_map(|parts| parts.join(" "))
}

fn session() -> impl Strategy<Value = Session> {
    let duration = 30.0f64..400.0;
    (duration, any::<bool>(), 1u8..=5).prop_flat_map(|(duration, friends, index)| {
        let utterance = (
            0usize..2,
            0.0..duration,
            0.0f64..20.0,
            text(),
            proptest::option::of(0u32..9),
        )
            .prop_map(move |(who, start, len, text, clauses)| {
                (who, start, (start + len).min(duration), text, clauses)
            });
        let rating = (0usize..14, 1u8..=7);
        let event = (0usize..3, 0usize..2, 0.0..duration);
        (
            proptest::collection::vec(utterance, 0..12),
            proptest::collection::vec(rating, 0..5),
            proptest::collection::vec(event, 0..5),
        )
            .prop_map(move |(utts, ratings, events)| {
                let ids = ["S1", "S2"];
                let header = SessionHeader {
                    dyad_id: "dy ad".into(),
                    session_index: index,
                    relationship: if friends {
                        Relationship::Friends
                    } else {
                        Relationship::Strangers
                    },
                    speakers: [
                        Speaker {
                            id: ids[0].into(),
                            gender: "f".into(),
                        },
                        Speaker {
                            id: ids[1].into(),
                            gender: String::new(),
                        },
                    ],
                    duration,
                };
                let utterances = utts
                    .into_iter()
                    .map(|(who, s, e, t, c)| Utterance::new(ids[who], s, e, t, c, None))
                    .collect();
                let rapport = ratings
                    .into_iter()
                    .map(|(slice_index, r)| RapportRating {
                        slice_index,
                        rating: f64::from(r),
                    })
                    .collect();
                let strategies = events
                    .into_iter()
                    .map(|(k, who, t)| StrategyEvent {
                        strategy_kind: StrategyKind::ALL[k],
                        speaker: ids[who].into(),
                        timestamp_seconds: t,
                    })
                    .collect();
                Session::new(header, utterances, Some(rapport), Some(strategies)).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn tsv_round_trip(s in session()) {
        let encoded = to_tsv(&s);
        let back = parse_session(&encoded).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(to_tsv(&back), encoded);
    }

    #[test]
    fn json_round_trip(s in session()) {
        let encoded = to_json(&s);
        prop_assert_eq!(parse_session(&encoded).unwrap(), s);
    }
}

#[test]
fn synthetic_sessions_survive_both_encodings() {
    let spec = dyad::synth::SynthSpec {
        n_slices: 20,
        math_text: true,
        ..dyad::synth::SynthSpec::with_seed(5)
    };
    for s in dyad::synth::gen_corpus(&spec, 2, 2).unwrap() {
        assert_eq!(parse_session(&to_tsv(&s)).unwrap(), s);
        assert_eq!(parse_session(&to_json(&s)).unwrap(), s);
    }
}
