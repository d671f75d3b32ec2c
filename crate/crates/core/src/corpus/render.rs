use super::{LabeledSentence, Segment, StanceLabel, Topic};
use crate::error::{Error, Result};

/// Fills the slot template: `"<Topic> should be supported because <span>"`
/// (or `opposed` for CON). The span text is used verbatim.
pub fn render_argument(span_text: &str, topic: &Topic, stance: StanceLabel) -> Result<String> {
    let verb = match stance {
        StanceLabel::Pro => "supported",
        StanceLabel::Con => "opposed",
        StanceLabel::Non => return Err(Error::invalid("NON spans are not arguments")),
    };
    let mut chars = topic.name.trim().chars();
    let subject: String = match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => return Err(Error::invalid("topic has an empty name")),
    };
    Ok(format!("{subject} should be {verb} because {}", span_text.trim()))
}

/// Renders one segment of `sentence` as an argument statement.
pub fn render_segment(sentence: &LabeledSentence, segment: &Segment) -> Result<String> {
    if segment.end > sentence.len() || segment.is_empty() {
        return Err(Error::sentence(
            &sentence.sentence_id,
            format!("segment {segment} out of range"),
        ));
    }
    let text = detokenize(&sentence.tokens[segment.start..segment.end]);
    render_argument(&text, &sentence.topic, segment.label)
}

/// Joins tokens with spaces, attaching closing punctuation and clitics to the
/// preceding token and opening brackets to the following one.
pub fn detokenize(tokens: &[String]) -> String {
    const ATTACH_LEFT: [&str; 16] = [
        ".", ",", ";", ":", "!", "?", "%", ")", "]", "}", "'s", "n't", "'re", "'ve", "'ll", "'m",
    ];
    const ATTACH_RIGHT: [&str; 4] = ["(", "[", "{", "$"];
    let mut out = String::new();
    let mut glue_next = true;
    for token in tokens {
        let lower = token.to_lowercase();
        if !glue_next && !ATTACH_LEFT.contains(&lower.as_str()) {
            out.push(' ');
        }
        out.push_str(token);
        glue_next = ATTACH_RIGHT.contains(&token.as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn pro_statement() {
        let topic = Topic::aurc8("school uniforms").unwrap();
        assert_eq!(
            render_argument("they may create a sense of positive unity", &topic, StanceLabel::Pro).unwrap(),
            "School uniforms should be supported because they may create a sense of positive unity"
        );
    }

    #[test]
    fn con_statement_from_segment() {
        let text = "Uniforms look neat , but they can also imply the sacrifice of individuality to a group mentally .";
        let tokens = toks(text);
        let n = tokens.len();
        let mut labels = vec![StanceLabel::Non; n];
        labels[5..].fill(StanceLabel::Con);
        let sentence = LabeledSentence::new("s", Topic::aurc8("T8").unwrap(), tokens, labels).unwrap();
        let segment = sentence.segments()[0];
        assert_eq!(
            render_segment(&sentence, &segment).unwrap(),
            "School uniforms should be opposed because they can also imply the sacrifice of individuality to a group mentally."
        );
    }

    #[test]
    fn non_is_rejected() {
        let topic = Topic::aurc8("T1").unwrap();
        assert!(render_argument("anything", &topic, StanceLabel::Non).is_err());
    }

    #[test]
    fn detokenize_attaches_punctuation() {
        assert_eq!(detokenize(&toks("it does n't ( really ) work , ok ?")), "it doesn't (really) work, ok?");
    }
}
