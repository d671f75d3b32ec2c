use crate::corpus::Topic;

/// Feature strings for one token position.
pub type TokenFeatures = Vec<String>;

/// Collapsed character-class shape: `Energy` -> `Xx`, `2020` -> `d`, `U.S.` -> `X.X.`.
pub fn shape(token: &str) -> String {
    let mut out = String::new();
    for c in token.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if !out.ends_with(class) {
            out.push(class);
        }
    }
    out
}

fn normalize(word: &str) -> &str {
    word.strip_suffix('s').filter(|w| w.len() >= 3).unwrap_or(word)
}

/// Whether the lowercased `word` names part of the topic, ignoring a plural `s`.
pub fn in_topic(word: &str, topic_words: &[String]) -> bool {
    topic_words.iter().any(|t| normalize(t) == normalize(word))
}

/// Features per token, in a fixed order:
///
/// bias, lowercased word, prefixes and suffixes of length 1-3, shape, the
/// words at offsets -2, -1, +1, +2 (padded with `<s>` / `</s>`), relative
/// position bucket (fifths of the sentence), `intopic` when the word belongs
/// to the topic name, `topic_in_sent` when any word does, then the topic-id
/// conjunctions `T=<id>` and `T=<id>|w=<word>`.
///
/// Features depend only on tokens, position and topic.
pub fn featurize(tokens: &[String], topic: &Topic) -> Vec<TokenFeatures> {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let topic_words = topic.words();
    let sentence_has_topic = lower.iter().any(|w| in_topic(w, &topic_words));
    let n = tokens.len();
    let context = |i: isize| -> &str {
        if i < 0 {
            "<s>"
        } else if i as usize >= n {
            "</s>"
        } else {
            &lower[i as usize]
        }
    };
    (0..n)
        .map(|i| {
            let word = &lower[i];
            let chars: Vec<char> = word.chars().collect();
            let mut f = Vec::with_capacity(20);
            f.push("bias".to_string());
            f.push(format!("w={word}"));
            for k in 1..=3.min(chars.len()) {
                f.push(format!("p{k}={}", chars[..k].iter().collect::<String>()));
            }
            for k in 1..=3.min(chars.len()) {
                f.push(format!("s{k}={}", chars[chars.len() - k..].iter().collect::<String>()));
            }
            f.push(format!("shape={}", shape(&tokens[i])));
            let pos = i as isize;
            f.push(format!("w-2={}", context(pos - 2)));
            f.push(format!("w-1={}", context(pos - 1)));
            f.push(format!("w+1={}", context(pos + 1)));
            f.push(format!("w+2={}", context(pos + 2)));
            f.push(format!("pos={}", 5 * i / n));
            if in_topic(word, &topic_words) {
                f.push("intopic".to_string());
            }
            if sentence_has_topic {
                f.push("topic_in_sent".to_string());
            }
            f.push(format!("T={}", topic.id));
            f.push(format!("T={}|w={word}", topic.id));
            f
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn shapes() {
        assert_eq!(shape("Energy"), "Xx");
        assert_eq!(shape("2020"), "d");
        assert_eq!(shape("U.S."), "X.X.");
        assert_eq!(shape("co-op"), "x-x");
    }

    #[test]
    fn topic_word_detection() {
        let topic = Topic::aurc8("nuclear energy").unwrap();
        let features = featurize(&toks("Energy is cheap"), &topic);
        assert!(features[0].contains(&"intopic".to_string()));
        assert!(!features[1].contains(&"intopic".to_string()));
        let uniforms = Topic::aurc8("school uniforms").unwrap();
        assert!(featurize(&toks("a uniform"), &uniforms)[1].contains(&"intopic".to_string()));
    }

    #[test]
    fn deterministic() {
        let topic = Topic::aurc8("T3").unwrap();
        let s = toks("Legal weed raises tax revenue .");
        assert_eq!(featurize(&s, &topic), featurize(&s, &topic));
    }

    #[test]
    fn three_token_sentence_enumerated_by_hand() {
        let topic = Topic::aurc8("T2").unwrap(); // cloning
        let got = featurize(&toks("Cloning is OK"), &topic);
        let expected: Vec<Vec<&str>> = vec![
            vec![
                "bias", "w=cloning", "p1=c", "p2=cl", "p3=clo", "s1=g", "s2=ng", "s3=ing", "shape=Xx",
                "w-2=<s>", "w-1=<s>", "w+1=is", "w+2=ok", "pos=0", "intopic", "topic_in_sent", "T=T2",
                "T=T2|w=cloning",
            ],
            vec![
                "bias", "w=is", "p1=i", "p2=is", "s1=s", "s2=is", "shape=x", "w-2=<s>", "w-1=cloning",
                "w+1=ok", "w+2=</s>", "pos=1", "topic_in_sent", "T=T2", "T=T2|w=is",
            ],
            vec![
                "bias", "w=ok", "p1=o", "p2=ok", "s1=k", "s2=ok", "shape=X", "w-2=cloning", "w-1=is",
                "w+1=</s>", "w+2=</s>", "pos=3", "topic_in_sent", "T=T2", "T=T2|w=ok",
            ],
        ];
        assert_eq!(got, expected);
    }
}
