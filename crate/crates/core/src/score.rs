//! Symbolic monophonic scores and their text encodings.
//!
//! Two encodings are supported. JSON-lines is canonical: one `{"pitch", "dur"}`
//! object per line, preceded by an optional header object carrying the title and
//! metadata. CSV uses a `pitch,dur` header row, with the same header object
//! allowed on a leading `#` line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

const SHARP_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// MIDI pitch number, C4 = 60.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pitch(u8);

impl Pitch {
    pub fn new(semitone: i64) -> Option<Pitch> {
        (0..=127).contains(&semitone).then(|| Pitch(semitone as u8))
    }

    pub fn semitone(self) -> u8 {
        self.0
    }

    /// Scientific pitch name using sharps, e.g. `G#3`.
    pub fn name(self) -> String {
        let octave = i32::from(self.0) / 12 - 1;
        format!("{}{}", SHARP_NAMES[usize::from(self.0 % 12)], octave)
    }

    /// Parses a scientific pitch name such as `C4`, `G#3`, `Bb2` or `C-1`.
    pub fn parse_name(name: &str) -> Option<i64> {
        let mut chars = name.trim().chars().peekable();
        let class: i64 = match chars.next()?.to_ascii_uppercase() {
            'C' => 0,
            'D' => 2,
            'E' => 4,
            'F' => 5,
            'G' => 7,
            'A' => 9,
            'B' => 11,
            _ => return None,
        };
        let mut alter = 0i64;
        while let Some(&c) = chars.peek() {
            match c {
                '#' | '♯' => alter += 1,
                'b' | '♭' => alter -= 1,
                _ => break,
            }
            chars.next();
        }
        let octave: i64 = chars.collect::<String>().parse().ok()?;
        Some((octave + 1) * 12 + class + alter)
    }
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Pitch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Pitch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        parse_pitch_value(&v).map_err(serde::de::Error::custom)
    }
}

/// Note length in Jeonggan, kept as an exact positive rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Duration(Ratio<i64>);

impl Duration {
    pub fn new(numer: i64, denom: i64) -> Option<Duration> {
        if denom == 0 {
            return None;
        }
        let r = Ratio::new(numer, denom);
        r.is_positive().then_some(Duration(r))
    }

    pub fn whole(n: i64) -> Option<Duration> {
        Duration::new(n, 1)
    }

    pub fn value(self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }
}

impl std::ops::Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Duration {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let r = Ratio::<i64>::from_str(s.trim()).map_err(|e| format!("bad duration {s:?}: {e}"))?;
        if r.is_zero() || r.is_negative() {
            return Err(format!("nonpositive duration {s}"));
        }
        Ok(Duration(r))
    }
}

impl Serialize for Duration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Duration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        match parse_duration_value(&v) {
            Ok(Some(dur)) => Ok(dur),
            Ok(None) => Err(serde::de::Error::custom(format!("nonpositive duration {v}"))),
            Err(e) => Err(serde::de::Error::custom(e)),
        }
    }
}

/// A (pitch, duration) pair. Ordering is by pitch, then duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Note {
    pub pitch: Pitch,
    #[serde(rename = "dur")]
    pub duration: Duration,
}

impl Note {
    pub fn new(pitch: Pitch, duration: Duration) -> Note {
        Note { pitch, duration }
    }
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.pitch, self.duration)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    pub title: String,
    pub metadata: BTreeMap<String, String>,
    flow: Vec<Note>,
    /// Positions of empty beats: `i` means a rest sits just before note `i`.
    rests: Vec<usize>,
}

impl Score {
    pub fn new(flow: Vec<Note>) -> Result<Score> {
        if flow.len() < 2 {
            return Err(Error::TooFewNotes { found: flow.len() });
        }
        Ok(Score {
            title: String::new(),
            metadata: BTreeMap::new(),
            flow,
            rests: Vec::new(),
        })
    }

    /// A score with rests; `rests` holds, for each rest, the index of the note after it.
    pub fn with_rests(flow: Vec<Note>, mut rests: Vec<usize>) -> Result<Score> {
        let mut score = Score::new(flow)?;
        if let Some(&bad) = rests.iter().find(|&&r| r > score.flow.len()) {
            return Err(Error::InvalidConfig(format!("rest position {bad} beyond the last note")));
        }
        rests.sort_unstable();
        score.rests = rests;
        Ok(score)
    }

    pub fn rests(&self) -> &[usize] {
        &self.rests
    }

    /// Whether notes `i - 1` and `i` are separated by a rest.
    pub fn rest_before(&self, i: usize) -> bool {
        self.rests.binary_search(&i).is_ok()
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Score {
        self.title = title.into();
        self
    }

    pub fn flow(&self) -> &[Note] {
        &self.flow
    }

    pub fn len(&self) -> usize {
        self.flow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flow.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    JsonLines,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json-lines" | "jsonlines" | "ndjson" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown score format {other:?}")),
        }
    }
}

impl Format {
    /// Picks the format from a file extension, defaulting to JSON-lines.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::JsonLines,
        }
    }
}

pub fn parse_score(text: &str, format: Format) -> Result<Score> {
    match format {
        Format::JsonLines => parse_jsonl(text),
        Format::Csv => parse_csv(text),
    }
}

pub fn serialize_score(score: &Score, format: Format) -> String {
    let mut out = String::new();
    let header = header_object(score);
    match format {
        Format::JsonLines => {
            if let Some(h) = header {
                out.push_str(&h);
                out.push('\n');
            }
            for (i, note) in score.flow.iter().enumerate() {
                for _ in rests_at(score, i) {
                    out.push_str("{\"rest\":true}\n");
                }
                out.push_str(&format!("{{\"pitch\":\"{}\",\"dur\":\"{}\"}}\n", note.pitch.name(), note.duration));
            }
            for _ in rests_at(score, score.flow.len()) {
                out.push_str("{\"rest\":true}\n");
            }
        }
        Format::Csv => {
            if let Some(h) = header {
                out.push('#');
                out.push_str(&h);
                out.push('\n');
            }
            out.push_str("pitch,dur\n");
            for (i, note) in score.flow.iter().enumerate() {
                for _ in rests_at(score, i) {
                    out.push_str("rest\n");
                }
                out.push_str(&format!("{},{}\n", note.pitch.name(), note.duration));
            }
            for _ in rests_at(score, score.flow.len()) {
                out.push_str("rest\n");
            }
        }
    }
    out
}

fn rests_at(score: &Score, i: usize) -> impl Iterator<Item = &usize> {
    score.rests.iter().filter(move |&&r| r == i)
}

fn header_object(score: &Score) -> Option<String> {
    if score.title.is_empty() && score.metadata.is_empty() {
        return None;
    }
    let mut obj = Map::new();
    obj.insert("format_version".into(), FORMAT_VERSION.into());
    if !score.title.is_empty() {
        obj.insert("title".into(), score.title.clone().into());
    }
    if !score.metadata.is_empty() {
        let meta: Map<String, Value> = score
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        obj.insert("metadata".into(), Value::Object(meta));
    }
    Some(Value::Object(obj).to_string())
}

fn apply_header(line: usize, obj: &Map<String, Value>, title: &mut String, meta: &mut BTreeMap<String, String>) -> Result<()> {
    let malformed = |message: String| Error::MalformedRecord { line, message };
    if let Some(v) = obj.get("format_version") {
        let found = v.as_u64().ok_or_else(|| malformed("format_version must be an integer".into()))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::FormatVersion { found: found as u32, expected: FORMAT_VERSION });
        }
    }
    if let Some(v) = obj.get("title") {
        *title = v.as_str().ok_or_else(|| malformed("title must be a string".into()))?.to_owned();
    }
    if let Some(v) = obj.get("metadata") {
        let m = v.as_object().ok_or_else(|| malformed("metadata must be an object".into()))?;
        for (k, v) in m {
            let v = v.as_str().ok_or_else(|| malformed(format!("metadata value for {k:?} must be a string")))?;
            meta.insert(k.clone(), v.to_owned());
        }
    }
    Ok(())
}

fn parse_jsonl(text: &str) -> Result<Score> {
    let mut title = String::new();
    let mut metadata = BTreeMap::new();
    let mut flow = Vec::new();
    let mut rests = Vec::new();
    let mut seen_record = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(raw).map_err(|e| Error::MalformedRecord {
            line,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::MalformedRecord {
            line,
            message: "expected a JSON object".into(),
        })?;
        if obj.contains_key("rest") {
            seen_record = true;
            rests.push(flow.len());
            continue;
        }
        if !obj.contains_key("pitch") && !seen_record {
            apply_header(line, obj, &mut title, &mut metadata)?;
            seen_record = true;
            continue;
        }
        seen_record = true;
        let pitch = obj.get("pitch").ok_or_else(|| Error::MalformedRecord {
            line,
            message: "missing field `pitch`".into(),
        })?;
        let dur = obj.get("dur").ok_or_else(|| Error::MalformedRecord {
            line,
            message: "missing field `dur`".into(),
        })?;
        flow.push(note_from_values(line, pitch, dur)?);
    }
    let mut score = Score::with_rests(flow, rests)?;
    score.title = title;
    score.metadata = metadata;
    Ok(score)
}

fn parse_csv(text: &str) -> Result<Score> {
    let mut title = String::new();
    let mut metadata = BTreeMap::new();
    let mut flow = Vec::new();
    let mut rests = Vec::new();
    let mut columns: Option<(usize, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if columns.is_none() && flow.is_empty() {
                let value: Value = serde_json::from_str(rest).map_err(|e| Error::MalformedRecord {
                    line,
                    message: format!("bad header comment: {e}"),
                })?;
                let obj = value.as_object().ok_or_else(|| Error::MalformedRecord {
                    line,
                    message: "header comment must be a JSON object".into(),
                })?;
                apply_header(line, obj, &mut title, &mut metadata)?;
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if columns.is_some() && fields.iter().any(|f| f.eq_ignore_ascii_case("rest")) {
            rests.push(flow.len());
            continue;
        }
        let Some((pi, di)) = columns else {
            let pi = fields.iter().position(|f| f.eq_ignore_ascii_case("pitch"));
            let di = fields.iter().position(|f| f.eq_ignore_ascii_case("dur"));
            match (pi, di) {
                (Some(p), Some(d)) => columns = Some((p, d)),
                _ => {
                    return Err(Error::MalformedRecord {
                        line,
                        message: "expected CSV header `pitch,dur`".into(),
                    })
                }
            }
            continue;
        };
        let (Some(p), Some(d)) = (fields.get(pi), fields.get(di)) else {
            return Err(Error::MalformedRecord {
                line,
                message: format!("expected {} fields", pi.max(di) + 1),
            });
        };
        let pitch = match p.parse::<i64>() {
            Ok(n) => Value::from(n),
            Err(_) => Value::String((*p).to_owned()),
        };
        flow.push(note_from_values(line, &pitch, &Value::String((*d).to_owned()))?);
    }
    let mut score = Score::with_rests(flow, rests)?;
    score.title = title;
    score.metadata = metadata;
    Ok(score)
}

fn note_from_values(line: usize, pitch: &Value, dur: &Value) -> Result<Note> {
    let semitone = match pitch {
        Value::Number(n) => n.as_i64().ok_or_else(|| Error::MalformedRecord {
            line,
            message: format!("pitch {n} is not an integer"),
        })?,
        Value::String(s) => match s.trim().parse::<i64>() {
            Ok(n) => n,
            Err(_) => Pitch::parse_name(s).ok_or_else(|| Error::MalformedRecord {
                line,
                message: format!("unrecognised pitch name {s:?}"),
            })?,
        },
        other => {
            return Err(Error::MalformedRecord {
                line,
                message: format!("pitch must be an integer or a name, got {other}"),
            })
        }
    };
    let pitch = Pitch::new(semitone).ok_or(Error::PitchOutOfRange { line, value: semitone })?;
    let duration = parse_duration_value(dur)
        .map_err(|message| Error::MalformedRecord { line, message })?
        .ok_or_else(|| Error::NonPositiveDuration {
            line,
            value: dur.as_str().map(str::to_owned).unwrap_or_else(|| dur.to_string()),
        })?;
    Ok(Note::new(pitch, duration))
}

fn parse_pitch_value(v: &Value) -> std::result::Result<Pitch, String> {
    let semitone = match v {
        Value::Number(n) => n.as_i64().ok_or("pitch must be an integer")?,
        Value::String(s) => Pitch::parse_name(s).ok_or_else(|| format!("bad pitch {s:?}"))?,
        _ => return Err("pitch must be an integer or a name".into()),
    };
    Pitch::new(semitone).ok_or_else(|| format!("pitch {semitone} outside 0..=127"))
}

/// `Ok(None)` means the value parsed but is not positive.
fn parse_duration_value(v: &Value) -> std::result::Result<Option<Duration>, String> {
    let r = match v {
        Value::Number(n) => Ratio::from_integer(n.as_i64().ok_or_else(|| format!("duration {n} is not an integer or rational string"))?),
        Value::String(s) => Ratio::<i64>::from_str(s.trim()).map_err(|e| format!("bad duration {s:?}: {e}"))?,
        other => return Err(format!("duration must be a rational string or integer, got {other}")),
    };
    Ok(r.is_positive().then_some(Duration(r)))
}
