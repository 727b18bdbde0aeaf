use dodeuri_core::score::{parse_score, serialize_score, Duration, Format, Note, Pitch, Score};
use proptest::prelude::*;

fn note() -> impl Strategy<Value = Note> {
    (0i64..=127, 1i64..=12, 1i64..=12).prop_map(|(p, n, d)| Note::new(Pitch::new(p).unwrap(), Duration::new(n, d).unwrap()))
}

proptest! {
    #[test]
    fn score_round_trips(notes in prop::collection::vec(note(), 2..60), title in "[a-zA-Z ]{0,12}", csv in any::<bool>()) {
        let score = Score::new(notes).unwrap().with_title(title);
        let format = if csv { Format::Csv } else { Format::JsonLines };
        let text = serialize_score(&score, format);
        prop_assert_eq!(parse_score(&text, format).unwrap(), score);
    }

    #[test]
    fn pitch_names_round_trip(p in 0i64..=127) {
        let pitch = Pitch::new(p).unwrap();
        prop_assert_eq!(Pitch::parse_name(&pitch.name()), Some(p));
    }
}
