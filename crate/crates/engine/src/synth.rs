//! Seeded synthetic corpora standing in for clinical recordings.
//!
//! Each sample is an interviewer/patient conversation whose impairment
//! level follows the sample's MMSE. Impairment raises off-topic content,
//! fillers, repetitions, overlaps and voice perturbation, and lowers
//! syntactic complexity and pitch range. Articulation rate drops only
//! slightly, so filler density dominates the per-minute rates. The audio
//! track carries the patient's voice only: a harmonic source with
//! per-period jitter and shimmer plus breath noise, one syllable per word.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::Result;
use cogspeech_core::dsp::AudioBuffer;
use cogspeech_core::{CutoffTable, Label, SeverityLevel, Speaker, UtteranceRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{write_manifest, write_transcript, ManifestRow};
use crate::wav::write_wav;

pub const EMBEDDING_DIM: usize = 50;
pub const EMBEDDING_SEED: u64 = 7;

struct Topic {
    question: &'static [&'static str],
    nouns: &'static [&'static str],
    verbs: &'static [&'static str],
    adjectives: &'static [&'static str],
}

const TOPICS: &[Topic] = &[
    Topic {
        question: &["Tell me about your garden.", "What flowers did you grow in the garden?", "Do you still enjoy gardening?"],
        nouns: &["garden", "flowers", "roses", "tomatoes", "seeds", "soil", "shed", "hedge", "tulips", "vegetables", "gardening"],
        verbs: &["planted", "watered", "picked", "weeded", "trimmed"],
        adjectives: &["green", "fresh", "blooming", "leafy"],
    },
    Topic {
        question: &["Tell me about your family.", "How often does your family visit?", "What do your grandchildren like to do?"],
        nouns: &["daughter", "son", "grandchildren", "sister", "brother", "wedding", "cousins", "nephew", "husband", "mother", "family"],
        verbs: &["visited", "called", "hugged", "married", "raised"],
        adjectives: &["proud", "loving", "close", "young"],
    },
    Topic {
        question: &["What did you have for lunch today?", "What is your favourite meal to cook?", "Do you like baking bread?"],
        nouns: &["soup", "bread", "potatoes", "chicken", "kitchen", "oven", "recipe", "pie", "butter", "onions", "lunch", "meal"],
        verbs: &["cooked", "baked", "tasted", "peeled", "boiled"],
        adjectives: &["delicious", "warm", "crispy", "salty"],
    },
    Topic {
        question: &["What kind of music do you enjoy?", "Did you ever play an instrument?", "Which songs do you remember from your youth?"],
        nouns: &["music", "piano", "songs", "choir", "concert", "violin", "radio", "melody", "band", "records", "instrument", "youth"],
        verbs: &["played", "listened", "danced", "practised", "hummed"],
        adjectives: &["loud", "beautiful", "classical", "lively"],
    },
    Topic {
        question: &["How is the weather today?", "Do you like walking when it is sunny?", "What do you do on rainy days?"],
        nouns: &["weather", "rain", "sunshine", "clouds", "umbrella", "storm", "snow", "wind", "puddles", "sky", "days"],
        verbs: &["rained", "shined", "poured", "cleared", "snowed"],
        adjectives: &["cold", "sunny", "windy", "grey"],
    },
    Topic {
        question: &["Where did you travel when you were younger?", "Tell me about your favourite holiday.", "Did you like trains or planes?"],
        nouns: &["holiday", "beach", "train", "mountains", "hotel", "suitcase", "island", "harbour", "ticket", "village", "trains", "planes"],
        verbs: &["travelled", "visited", "booked", "sailed", "explored"],
        adjectives: &["sandy", "distant", "foreign", "scenic"],
    },
    Topic {
        question: &["Did you have any pets?", "Tell me about your dog.", "Do you like birds in the park?"],
        nouns: &["dog", "cat", "puppy", "birds", "kitten", "leash", "horse", "pond", "ducks", "rabbit", "pets", "park"],
        verbs: &["walked", "fed", "brushed", "trained", "adopted"],
        adjectives: &["furry", "playful", "gentle", "tiny"],
    },
    Topic {
        question: &["What work did you do?", "Tell me about your job.", "Did you enjoy your office?"],
        nouns: &["office", "factory", "colleagues", "boss", "letters", "desk", "typewriter", "meetings", "salary", "shift", "work", "job"],
        verbs: &["worked", "typed", "managed", "retired", "repaired"],
        adjectives: &["busy", "careful", "early", "steady"],
    },
];

/// Vague words used in place of specific nouns by impaired speakers.
const GENERIC: &[&str] = &["thing", "stuff", "things", "something", "place", "whatsit"];
const GENERIC_CONTENT: &[&str] = &["really", "nice", "good", "lots", "always", "often", "sometimes"];
const FILLERS: &[&str] = &["um", "uh", "er", "hmm"];
const PREPS: &[&str] = &["in", "near", "with", "by"];

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap_or("")
}

/// Every word that receives a vector: topic vocabulary and vague terms.
/// Question wording outside the topic lists stays uncovered.
pub fn embedding_vocabulary() -> Vec<&'static str> {
    let mut v: Vec<&str> = Vec::new();
    for t in TOPICS {
        v.extend(t.nouns);
        v.extend(t.verbs);
        v.extend(t.adjectives);
    }
    v.extend(GENERIC);
    v.extend(GENERIC_CONTENT);
    let mut seen = std::collections::BTreeSet::new();
    v.retain(|w| seen.insert(w.to_lowercase()));
    v
}

fn topic_of(word: &str) -> Option<usize> {
    let w = word.to_lowercase();
    TOPICS.iter().position(|t| {
        t.nouns.contains(&w.as_str())
            || t.verbs.contains(&w.as_str())
            || t.adjectives.contains(&w.as_str())
    })
}

/// Embeddings in `word v1 .. v50` text form: topic words cluster around a
/// random topic direction, other words get independent directions.
pub fn topic_embeddings(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let unit = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..EMBEDDING_DIM).map(|_| normal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let centroids: Vec<Vec<f64>> = (0..TOPICS.len()).map(|_| unit(&mut rng)).collect();
    let mut out = format!("# {EMBEDDING_DIM}-d topic embeddings, seed {seed}\n");
    for w in embedding_vocabulary() {
        let noise = unit(&mut rng);
        let v: Vec<f64> = match topic_of(w) {
            Some(t) => centroids[t].iter().zip(&noise).map(|(c, n)| c + 0.35 * n).collect(),
            None => noise,
        };
        out.push_str(&w.to_lowercase());
        for x in v {
            out.push_str(&format!(" {x:.6}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct SynthSample {
    pub sample_id: String,
    pub mmse: u8,
    pub label: Label,
    /// 0 for healthy, 1 for the most impaired.
    pub impairment: f64,
    pub utterances: Vec<UtteranceRecord>,
    pub audio: AudioBuffer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub samples: usize,
    pub seed: u64,
    /// Approximate conversation length.
    pub duration_s: f64,
    pub sample_rate: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { samples: 40, seed: 7, duration_s: 30.0, sample_rate: 16000 }
    }
}

/// Patient speech span; each entry marks whether the word is a filler.
struct Segment {
    start_ms: i64,
    end_ms: i64,
    fillers: Vec<bool>,
}

fn patient_sentence<R: Rng>(rng: &mut R, topic: &'static Topic, s: f64) -> Vec<String> {
    let off = |rng: &mut R| -> &'static Topic {
        if rng.gen_bool((0.7 * s).min(1.0)) {
            TOPICS.choose(rng).expect("topics")
        } else {
            topic
        }
    };
    let noun = |rng: &mut R| -> String {
        if rng.gen_bool(0.5 * s) {
            pick(rng, GENERIC).into()
        } else {
            let t = off(rng);
            pick(rng, t.nouns).into()
        }
    };
    let t1 = off(rng);
    let verb = pick(rng, t1.verbs).to_string();
    let t2 = off(rng);
    let adj = pick(rng, t2.adjectives).to_string();
    let (n1, n2) = (noun(rng), noun(rng));
    let prep = pick(rng, PREPS);
    let complex = rng.gen_bool((0.8 - 0.7 * s).clamp(0.05, 0.95));
    let sentence = if !complex {
        match rng.gen_range(0..3) {
            0 => format!("{n1}."),
            1 => format!("the {n1} {prep} the {n2}."),
            _ => format!("I {verb} {n1}."),
        }
    } else {
        match rng.gen_range(0..4) {
            0 => format!("I {verb} the {adj} {n1} {prep} the {n2}."),
            1 => {
                let t = off(rng);
                format!("We {verb} the {n1} and I {} the {adj} {n2}.", pick(rng, t.verbs))
            }
            2 => format!("I remember the {n1} because it was {adj}."),
            _ => format!("Walking {prep} the {n1}, I {verb} the {adj} {n2}."),
        }
    };
    let mut words = Vec::new();
    for w in sentence.split_whitespace() {
        if rng.gen_bool(0.35 * s) {
            words.push(pick(rng, FILLERS).to_string() + ",");
        }
        words.push(w.to_string());
        if rng.gen_bool(0.15 * s) && w.chars().all(char::is_alphabetic) {
            words.push(w.to_string());
        }
    }
    if rng.gen_bool(0.3 * (1.0 - s)) {
        words.push(pick(rng, GENERIC_CONTENT).into());
    }
    words
}

fn mmse_in(level: SeverityLevel, cutoffs: &CutoffTable, rng: &mut impl Rng) -> u8 {
    let r = cutoffs.ranges().iter().find(|r| r.level == level).expect("cutoff table covers every level");
    rng.gen_range(r.min..=r.max)
}

/// One conversation with the given MMSE.
pub fn generate_sample(sample_id: &str, mmse: u8, cfg: &SynthConfig, seed: u64) -> Result<SynthSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.06).expect("finite sd");
    let s = ((30.0 - f64::from(mmse)) / 30.0 + noise.sample(&mut rng)).clamp(0.0, 1.0);
    let label = if mmse <= 23 { Label::Dementia } else { Label::Control };

    let patient_wpm = 150.0 - 20.0 * s;
    let agent_wpm = 170.0;
    let total_ms = (cfg.duration_s * 1000.0) as i64;
    let mut utts = Vec::new();
    let mut segments = Vec::new();
    let mut t: i64 = 300;
    let mut topic_idx = rng.gen_range(0..TOPICS.len());
    while t < total_ms {
        let topic = &TOPICS[topic_idx];
        let q = pick(&mut rng, topic.question);
        let q_ms = (q.split_whitespace().count() as f64 * 60000.0 / agent_wpm) as i64;
        let agent_end = t + q_ms.max(600);
        utts.push(UtteranceRecord::new(sample_id, Speaker::Agent, q, t, agent_end)?);

        let overlap = rng.gen_bool((0.05 + 0.45 * s).min(1.0));
        let start = if overlap {
            agent_end - rng.gen_range(150..500)
        } else {
            agent_end + rng.gen_range(250..(700 + (1500.0 * s) as i64))
        };
        let n_sent = rng.gen_range(1..=(3 - (1.5 * s) as usize).max(1));
        let mut words: Vec<String> = Vec::new();
        for _ in 0..n_sent {
            words.extend(patient_sentence(&mut rng, topic, s));
        }
        let word_ms = 60000.0 / patient_wpm;
        let dur = (words.len() as f64 * word_ms) as i64;
        let end = start + dur.max(400);
        let fillers = words.iter().map(|w| FILLERS.contains(&w.trim_end_matches(','))).collect();
        utts.push(UtteranceRecord::new(sample_id, Speaker::Patient, words.join(" "), start, end)?);
        segments.push(Segment { start_ms: start, end_ms: end, fillers });

        t = end + rng.gen_range(300..900);
        if rng.gen_bool(0.4) {
            topic_idx = rng.gen_range(0..TOPICS.len());
        }
    }
    let last = utts.iter().map(|u| u.t_end_ms).max().unwrap_or(0);
    let audio = synthesize_voice(&segments, last + 400, s, cfg.sample_rate, &mut rng)?;
    Ok(SynthSample { sample_id: sample_id.into(), mmse, label, impairment: s, utterances: utts, audio })
}

fn synthesize_voice(segments: &[Segment], total_ms: i64, s: f64, rate: u32, rng: &mut ChaCha8Rng) -> Result<AudioBuffer> {
    let fs = f64::from(rate);
    let n = ((total_ms as f64) * fs / 1000.0) as usize;
    let mut out = vec![0.0f64; n];
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let f0_base = rng.gen_range(95.0..210.0);
    let range = 0.14 * (1.0 - s) + 0.03;
    let jitter = 0.004 + 0.035 * s;
    let shimmer = 0.03 + 0.2 * s;
    let breath = 0.02 + 0.3 * s;
    let mut phase = 0.0f64;
    for seg in segments {
        let weight = |f: bool| if f { 1.6 } else { 1.0 };
        let units: f64 = seg.fillers.iter().map(|&f| weight(f)).sum();
        let unit_s = (seg.end_ms - seg.start_ms) as f64 / 1000.0 / units;
        let mut cursor = seg.start_ms as f64 / 1000.0;
        for (wi, filler) in seg.fillers.iter().enumerate() {
            let dur = unit_s * weight(*filler);
            let voiced = dur * 0.72;
            let a = (cursor * fs) as usize;
            let b = (((cursor + voiced) * fs) as usize).min(n);
            let contour = 1.0 + range * (2.0 * PI * (wi as f64) / 5.0).sin() - if *filler { 0.08 } else { 0.0 };
            let mut period_f0 = f0_base * contour;
            let mut period_amp = 1.0;
            let mut next_period = a;
            for (i, o) in out.iter_mut().enumerate().take(b).skip(a) {
                if i >= next_period {
                    period_f0 = f0_base * contour * (1.0 + jitter * unit.sample(rng));
                    period_amp = (1.0 + shimmer * unit.sample(rng)).max(0.1);
                    next_period = i + (fs / period_f0).max(1.0) as usize;
                }
                let pos = (i - a) as f64 / (b - a).max(1) as f64;
                let env = (PI * pos).sin().powf(0.6);
                phase += 2.0 * PI * period_f0 / fs;
                if phase > 2.0 * PI {
                    phase -= 2.0 * PI;
                }
                let mut v = 0.0;
                for h in 1..=6 {
                    v += (f64::from(h) * phase).sin() / f64::from(h);
                }
                let amp = if *filler { 0.18 } else { 0.3 };
                *o += amp * env * (period_amp * v * 0.5 + breath * unit.sample(rng));
            }
            cursor += dur;
        }
    }
    let floor = Normal::new(0.0, 0.0008).expect("finite sd");
    let pcm: Vec<i16> = out
        .into_iter()
        .map(|v| ((v + floor.sample(rng)).clamp(-1.0, 1.0) * 32767.0).round() as i16)
        .collect();
    Ok(AudioBuffer::from_pcm_i16(&pcm, rate)?)
}

/// Samples cycle through the four severity levels.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<Vec<SynthSample>> {
    let cutoffs = CutoffTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.samples)
        .map(|i| {
            let level = SeverityLevel::ALL[i % 4];
            let mmse = mmse_in(level, &cutoffs, &mut rng);
            let seed: u64 = rng.gen();
            generate_sample(&format!("synth-{i:04}"), mmse, cfg, seed)
        })
        .collect()
}

/// Writes `manifest.csv`, `transcripts/*.tsv` and `audio/*.wav` under
/// `dir`; returns the manifest path.
pub fn write_corpus(dir: &Path, samples: &[SynthSample]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("transcripts"))?;
    std::fs::create_dir_all(dir.join("audio"))?;
    let mut rows = Vec::new();
    for s in samples {
        let transcript = dir.join("transcripts").join(format!("{}.tsv", s.sample_id));
        let audio = dir.join("audio").join(format!("{}.wav", s.sample_id));
        write_transcript(&transcript, &s.utterances)?;
        write_wav(&audio, &s.audio)?;
        rows.push(ManifestRow { sample_id: s.sample_id.clone(), transcript, audio: Some(audio), mmse: Some(s.mmse), label: Some(s.label) });
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &rows)?;
    Ok(manifest)
}
