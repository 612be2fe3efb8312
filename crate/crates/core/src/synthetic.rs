//! Seeded synthetic corpora: a planted single-story fixture with a known
//! answer sheet, and random corpora for property tests.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    bin_floor, parse_timestamp, InvestigationConfig, KeywordRole, KeywordSpec, TweetId,
    TweetRecord, UserId, UserRef,
};

pub fn user(id: u64, screen_name: &str) -> UserRef {
    UserRef {
        user_id: UserId(id),
        screen_name: screen_name.to_string(),
        followers_count: 100,
        verified: false,
        description: String::new(),
        account_created_at: None,
    }
}

fn ts(s: &str) -> DateTime<Utc> {
    parse_timestamp(s).unwrap_or_else(|| panic!("bad timestamp {s}"))
}

/// An original tweet by user `user_id` (screen name `user{user_id}`).
pub fn tweet_by(id: u64, user_id: u64, created_at: &str, text: &str) -> TweetRecord {
    original(
        TweetId(id),
        user(user_id, &format!("user{user_id}")),
        ts(created_at),
        text,
        0,
    )
}

/// A retweet of `orig` by user `user_id`, in the platform's `RT @name: text` form.
pub fn retweet_of(id: u64, user_id: u64, created_at: &str, orig: &TweetRecord) -> TweetRecord {
    retweet(
        TweetId(id),
        user(user_id, &format!("user{user_id}")),
        ts(created_at),
        orig,
    )
}

fn original(
    id: TweetId,
    author: UserRef,
    created_at: DateTime<Utc>,
    text: &str,
    retweet_count: u64,
) -> TweetRecord {
    TweetRecord {
        tweet_id: id,
        created_at,
        text: text.to_string(),
        author,
        retweet_count,
        retweet_of: None,
        urls: Vec::new(),
        hashtags: Vec::new(),
        lang: None,
    }
}

fn retweet(
    id: TweetId,
    author: UserRef,
    created_at: DateTime<Utc>,
    orig: &TweetRecord,
) -> TweetRecord {
    TweetRecord {
        tweet_id: id,
        created_at,
        text: format!("RT @{}: {}", orig.author.screen_name, orig.text),
        author,
        retweet_count: orig.retweet_count,
        retweet_of: Some(orig.tweet_id),
        urls: orig.urls.clone(),
        hashtags: orig.hashtags.clone(),
        lang: orig.lang.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneStoryParams {
    pub seed: u64,
    pub noise_tweets: usize,
    pub first_retweeters: usize,
    pub second_retweeters: usize,
    /// Users who retweeted both main actors.
    pub shared_retweeters: usize,
}

impl Default for PlaneStoryParams {
    fn default() -> Self {
        Self {
            seed: 7,
            noise_tweets: 3_800,
            first_retweeters: 554,
            second_retweeters: 236,
            shared_retweeters: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedActor {
    pub user_id: UserId,
    pub screen_name: String,
    pub distinct_retweeters: usize,
}

/// The answers planted in the fixture. Scores are computed by direct scans
/// over the generated tweets and their planted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneStoryManifest {
    pub config: InvestigationConfig,
    pub total_tweets: usize,
    pub relevant_tweets: usize,
    pub earliest_story_tweet: TweetId,
    pub originator: TweetId,
    pub originator_screen_name: String,
    pub originator_retweet_count: u64,
    pub originator_time: DateTime<Utc>,
    pub break_time: DateTime<Utc>,
    pub main_actors: Vec<PlantedActor>,
    pub shared_retweeters: usize,
    pub first_refutation: TweetId,
    pub refutation_bin: DateTime<Utc>,
    pub propagation_h: u64,
    pub negation_h: u64,
    pub non_negation_h: u64,
    pub still_spreading: bool,
}

#[derive(Debug, Clone)]
pub struct PlaneStory {
    pub records: Vec<TweetRecord>,
    pub manifest: PlaneStoryManifest,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    Noise,
    Story,
    Negation,
}

struct Draft {
    record: TweetRecord,
    label: Label,
    /// Index of the parent draft for retweets.
    parent: Option<usize>,
}

const BACKGROUND: &[&str] = &[
    "Un avión ha caído al mar en Gran Canaria",
    "¿Avión en el mar? #GranCanaria",
    "Foto del avión en el agua cerca de la costa",
    "Dicen que hay un avión en el mar, alguien sabe algo",
    "Rescate del avión junto a la playa de Gran Canaria",
    "Imágenes del avión en el mar desde Las Palmas",
];

const REFUTATIONS: &[&str] = &[
    "Lo del avión es falso, era un barco",
    "El avión en el mar es falso #GranCanaria",
    "hoax: no hay ningún avión, es un remolcador",
    "Falso lo del avión, confirmado por Salvamento Marítimo",
];

const NOISE: &[&str] = &[
    "Partido esta noche en el estadio",
    "Qué calor hace hoy en Madrid",
    "Nuevo disco disponible en tiendas",
    "Los aviones de papel son lo mejor",
    "Great game tonight, what a goal",
    "Coffee first, then everything else",
    "Atasco en la autopista por obras",
    "Reading a good book this afternoon",
];

// retweet_counts of hand-picked originals after the break, on top of the
// background's 0..=2 counts
const AMPLIFIERS: &[u64] = &[
    120, 90, 60, 45, 33, 30, 28, 25, 22, 20, 18, 15, 12, 10, 8, 6,
];
const NEGATING_COUNTS: &[u64] = &[40, 12, 9, 7, 5, 4, 3, 3, 2, 1, 1, 0, 0];

fn scan_h_index(counts: &[u64]) -> u64 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|(i, &c)| c > *i as u64)
        .count() as u64
}

/// A single story in the shape of a false "plane in the sea" report: a slow
/// background, one highly retweeted tweet that breaks it, a second large
/// retweeted account sharing part of the audience, a refutation some minutes
/// later, and unrelated noise around it.
pub fn plane_story(params: &PlaneStoryParams) -> PlaneStory {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let day = ts("2014-03-27T00:00:00Z");
    let at = |hm: &str| ts(&format!("2014-03-27T{hm}:00Z"));
    let mut drafts: Vec<Draft> = Vec::new();
    let push = |drafts: &mut Vec<Draft>, record, label, parent| {
        drafts.push(Draft {
            record,
            label,
            parent,
        });
        drafts.len() - 1
    };
    let mut next_bg_user = 100u64;
    let mut bg_user = |rng: &mut ChaCha8Rng| {
        next_bg_user += 1 + rng.random_range(0..3);
        user(next_bg_user, &format!("vecino{next_bg_user}"))
    };
    let placeholder = TweetId(0);

    // slow background from 10:00, one or two tweets a bin with 0..=2 retweets
    let mut t = at("10:00");
    while t < at("10:49") {
        let text = BACKGROUND.choose(&mut rng).unwrap();
        let author = bg_user(&mut rng);
        let count = rng.random_range(0..=2);
        push(
            &mut drafts,
            original(placeholder, author, t, text, count),
            Label::Story,
            None,
        );
        t += Duration::seconds(rng.random_range(240..480));
    }
    let early = push(
        &mut drafts,
        original(
            placeholder,
            user(90, "primero"),
            at("10:49"),
            "Un avión en el mar de Gran Canaria?",
            0,
        ),
        Label::Story,
        None,
    );
    push(
        &mut drafts,
        original(
            placeholder,
            bg_user(&mut rng),
            at("10:51"),
            "Veo un avión en el mar desde la playa",
            2,
        ),
        Label::Story,
        None,
    );

    let mut first = original(
        placeholder,
        UserRef {
            followers_count: 4_200,
            ..user(1, "canarias_hoy")
        },
        at("10:53"),
        "Un avión ha caído al mar frente a Gran Canaria #avión",
        580,
    );
    first
        .urls
        .push("http://canariashoy.example/avion-mar".into());
    let first = push(&mut drafts, first, Label::Story, None);
    let second = push(
        &mut drafts,
        original(
            placeholder,
            UserRef {
                followers_count: 90_000,
                verified: true,
                ..user(2, "noticias24")
            },
            at("11:05"),
            "Última hora: posible avión en el mar en Gran Canaria",
            250,
        ),
        Label::Story,
        None,
    );
    let refutation = push(
        &mut drafts,
        original(
            placeholder,
            UserRef {
                verified: true,
                ..user(3, "salvamento")
            },
            at("11:09"),
            "Es falso: no es un avión, es un remolcador #GranCanaria",
            NEGATING_COUNTS[0],
        ),
        Label::Negation,
        None,
    );

    // retweeter pools: the first actor's audience, a shared slice of it, and
    // users only the second actor reaches
    let first_pool: Vec<u64> = (0..params.first_retweeters as u64)
        .map(|i| 10_000 + i)
        .collect();
    let second_pool: Vec<u64> = first_pool[..params.shared_retweeters]
        .iter()
        .copied()
        .chain(
            (0..(params.second_retweeters - params.shared_retweeters) as u64).map(|i| 20_000 + i),
        )
        .collect();
    let decay =
        |rng: &mut ChaCha8Rng, from: DateTime<Utc>, mean_secs: f64, until: DateTime<Utc>| {
            let u: f64 = rng.random_range(0.0..1.0);
            let offset = (-mean_secs * (1.0 - u).ln()) as i64;
            (from + Duration::seconds(60 + offset)).min(until)
        };
    for &uid in &first_pool {
        let when = decay(&mut rng, at("10:53"), 1_200.0, at("12:40"));
        let r = retweet(
            placeholder,
            user(uid, &format!("fan{uid}")),
            when,
            &drafts[first].record,
        );
        push(&mut drafts, r, Label::Story, Some(first));
    }
    for &uid in &second_pool {
        let when = decay(&mut rng, at("11:05"), 1_500.0, at("12:50"));
        let r = retweet(
            placeholder,
            user(uid, &format!("fan{uid}")),
            when,
            &drafts[second].record,
        );
        push(&mut drafts, r, Label::Story, Some(second));
    }
    for i in 0..NEGATING_COUNTS[0] {
        let uid = 30_000 + i;
        let when = decay(&mut rng, at("11:09"), 900.0, at("12:30"));
        let r = retweet(
            placeholder,
            user(uid, &format!("lector{uid}")),
            when,
            &drafts[refutation].record,
        );
        push(&mut drafts, r, Label::Negation, Some(refutation));
    }

    // amplifiers and further refutations between 11:10 and 13:30, each with
    // a few retweets in the archive
    let mut minor_uid = 40_000u64;
    let mut spread =
        |drafts: &mut Vec<Draft>, rng: &mut ChaCha8Rng, texts: &[&str], counts: &[u64], label| {
            for &count in counts {
                let when = at("11:10") + Duration::seconds(rng.random_range(0..8_400));
                let text = texts.choose(rng).unwrap();
                let parent = push(
                    drafts,
                    original(placeholder, bg_user(rng), when, text, count),
                    label,
                    None,
                );
                for _ in 0..count.min(20) / 2 {
                    minor_uid += 1;
                    let rt_when = when + Duration::seconds(rng.random_range(30..1_200));
                    let r = retweet(
                        placeholder,
                        user(minor_uid, &format!("lector{minor_uid}")),
                        rt_when,
                        &drafts[parent].record,
                    );
                    push(drafts, r, label, Some(parent));
                }
            }
        };
    spread(&mut drafts, &mut rng, BACKGROUND, AMPLIFIERS, Label::Story);
    spread(
        &mut drafts,
        &mut rng,
        REFUTATIONS,
        &NEGATING_COUNTS[1..],
        Label::Negation,
    );

    // the story fades out: sparse low-retweet mentions until 13:55
    let mut t = at("11:10");
    while t < at("13:55") {
        let text = BACKGROUND.choose(&mut rng).unwrap();
        let author = bg_user(&mut rng);
        let count = rng.random_range(0..=2);
        push(
            &mut drafts,
            original(placeholder, author, t, text, count),
            Label::Story,
            None,
        );
        t += Duration::seconds(rng.random_range(300..900));
    }
    push(
        &mut drafts,
        original(
            placeholder,
            bg_user(&mut rng),
            at("13:55"),
            "Ya nadie habla del avión",
            0,
        ),
        Label::Story,
        None,
    );

    for i in 0..params.noise_tweets {
        let when = day + Duration::seconds(rng.random_range(6 * 3_600..20 * 3_600));
        let text = NOISE.choose(&mut rng).unwrap();
        let author = user(50_000 + (i as u64 % 700), &format!("otro{}", i % 700));
        let count = rng.random_range(0..=3);
        push(
            &mut drafts,
            original(placeholder, author, when, text, count),
            Label::Noise,
            None,
        );
    }

    // ids follow time, as on the platform
    let mut order: Vec<usize> = (0..drafts.len()).collect();
    order.sort_by_key(|&i| (drafts[i].record.created_at, i));
    let mut id_of = vec![TweetId(0); drafts.len()];
    for (rank, &i) in order.iter().enumerate() {
        id_of[i] = TweetId(1_000_000 + rank as u64);
    }
    for (i, d) in drafts.iter_mut().enumerate() {
        d.record.tweet_id = id_of[i];
        if let Some(p) = d.parent {
            d.record.retweet_of = Some(id_of[p]);
        }
    }

    let story: Vec<&Draft> = drafts.iter().filter(|d| d.label != Label::Noise).collect();
    let originals = |label: Option<Label>| -> Vec<u64> {
        story
            .iter()
            .filter(|d| d.parent.is_none() && label.is_none_or(|l| d.label == l))
            .map(|d| d.record.retweet_count)
            .collect()
    };
    let story_bins: BTreeSet<DateTime<Utc>> = story
        .iter()
        .map(|d| bin_floor(&d.record.created_at))
        .collect();
    let (first_bin, last_bin) = (*story_bins.first().unwrap(), *story_bins.last().unwrap());
    let bin_count = |b: DateTime<Utc>| {
        story
            .iter()
            .filter(|d| bin_floor(&d.record.created_at) == b)
            .count()
    };
    let peak = story_bins.iter().map(|&b| bin_count(b)).max().unwrap_or(0);
    debug_assert!(first_bin <= at("10:00"));

    let mut config = InvestigationConfig::new(id_of[first]);
    config
        .keywords
        .push(KeywordSpec::new("avión", KeywordRole::Required));
    config.negation_add.push("falso".into());

    let first_rec = &drafts[first].record;
    let manifest = PlaneStoryManifest {
        config,
        total_tweets: drafts.len(),
        relevant_tweets: story.len(),
        earliest_story_tweet: id_of[early],
        originator: first_rec.tweet_id,
        originator_screen_name: first_rec.author.screen_name.clone(),
        originator_retweet_count: first_rec.retweet_count,
        originator_time: first_rec.created_at,
        break_time: bin_floor(&first_rec.created_at),
        main_actors: vec![
            PlantedActor {
                user_id: first_rec.author.user_id,
                screen_name: first_rec.author.screen_name.clone(),
                distinct_retweeters: params.first_retweeters,
            },
            PlantedActor {
                user_id: drafts[second].record.author.user_id,
                screen_name: drafts[second].record.author.screen_name.clone(),
                distinct_retweeters: params.second_retweeters,
            },
        ],
        shared_retweeters: params.shared_retweeters,
        first_refutation: id_of[refutation],
        refutation_bin: bin_floor(&drafts[refutation].record.created_at),
        propagation_h: scan_h_index(&originals(None)),
        negation_h: scan_h_index(&originals(Some(Label::Negation))),
        non_negation_h: scan_h_index(&originals(Some(Label::Story))),
        still_spreading: bin_count(last_bin) * 4 >= peak,
    };
    let mut records: Vec<TweetRecord> = drafts.into_iter().map(|d| d.record).collect();
    records.sort_by_key(|r| r.tweet_id);
    PlaneStory { records, manifest }
}

/// `n` tweets over a small vocabulary spread across one day, about a fifth
/// of them retweets of earlier tweets. Every word is shared by many tweets,
/// so keyword filters select non-trivial subsets.
pub fn random_corpus(seed: u64, n: usize, vocabulary: &[&str], users: u64) -> Vec<TweetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day = ts("2014-03-27T00:00:00Z");
    let mut times: Vec<i64> = (0..n).map(|_| rng.random_range(0..86_400)).collect();
    times.sort_unstable();
    let mut out: Vec<TweetRecord> = Vec::with_capacity(n);
    for (i, secs) in times.into_iter().enumerate() {
        let id = TweetId(i as u64 + 1);
        let author_id = rng.random_range(1..=users.max(2));
        let author = user(author_id, &format!("u{author_id}"));
        let when = day + Duration::seconds(secs);
        let parent = (!out.is_empty() && rng.random_bool(0.2))
            .then(|| rng.random_range(0..out.len()))
            .filter(|&p| out[p].is_original() && out[p].author.user_id.0 != author_id);
        let rec = match parent {
            Some(p) => retweet(id, author, when, &out[p]),
            None => {
                let words = rng.random_range(3..=8);
                let text: Vec<&str> = (0..words)
                    .map(|_| *vocabulary.choose(&mut rng).unwrap())
                    .collect();
                original(id, author, when, &text.join(" "), rng.random_range(0..50))
            }
        };
        out.push(rec);
    }
    out
}
