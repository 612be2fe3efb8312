use crate::model::TweetRecord;

pub use crate::synthetic::{retweet_of, tweet_by};

/// Original tweet `id` by user `1000 + id`.
pub fn tweet(id: u64, created_at: &str, text: &str) -> TweetRecord {
    tweet_by(id, 1000 + id, created_at, text)
}
