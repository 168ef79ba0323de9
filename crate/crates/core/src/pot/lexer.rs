use super::PotError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    Name(String),
    Number(f64),
    Text(String),
    True,
    False,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    NotEq,
    LParen,
    RParen,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self {
            Token::Name(n) => format!("name `{n}`"),
            Token::Number(v) => format!("number {v}"),
            Token::Text(_) => "string literal".into(),
            Token::True => "`True`".into(),
            Token::False => "`False`".into(),
            Token::Assign => "`=`".into(),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Lt => "`<`".into(),
            Token::Gt => "`>`".into(),
            Token::Le => "`<=`".into(),
            Token::Ge => "`>=`".into(),
            Token::EqEq => "`==`".into(),
            Token::NotEq => "`!=`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

/// Python keywords; none of them may appear as a name.
const KEYWORDS: &[&str] = &[
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield", "None",
];

/// Tokenizes one source line. Everything from an unquoted `#` onwards is a
/// comment.
pub(crate) fn tokenize_line(src: &str, line: usize) -> Result<Vec<Token>, PotError> {
    let err = |message: String| PotError::Syntax { line, message };
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break,
            '+' => push(&mut tokens, &mut i, Token::Plus, 1),
            '-' => push(&mut tokens, &mut i, Token::Minus, 1),
            '*' => {
                if chars.get(i + 1) == Some(&'*') {
                    return Err(err("`**` is not supported".into()));
                }
                push(&mut tokens, &mut i, Token::Star, 1)
            }
            '/' => {
                if chars.get(i + 1) == Some(&'/') {
                    return Err(err("`//` is not supported".into()));
                }
                push(&mut tokens, &mut i, Token::Slash, 1)
            }
            '(' => push(&mut tokens, &mut i, Token::LParen, 1),
            ')' => push(&mut tokens, &mut i, Token::RParen, 1),
            '<' | '>' | '=' | '!' => {
                let two = chars.get(i + 1) == Some(&'=');
                let token = match (c, two) {
                    ('<', false) => Token::Lt,
                    ('<', true) => Token::Le,
                    ('>', false) => Token::Gt,
                    ('>', true) => Token::Ge,
                    ('=', false) => Token::Assign,
                    ('=', true) => Token::EqEq,
                    ('!', true) => Token::NotEq,
                    _ => return Err(err("unexpected character `!`".into())),
                };
                push(&mut tokens, &mut i, token, if two { 2 } else { 1 });
            }
            '"' | '\'' => {
                let (text, next) = lex_string(&chars, i, line)?;
                tokens.push(Token::Text(text));
                i = next;
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    return Err(err(format!("malformed number near `{}`", chars[start..=i].iter().collect::<String>())));
                }
                let literal: String = chars[start..i].iter().collect();
                let value = literal.parse::<f64>().map_err(|_| err(format!("malformed number `{literal}`")))?;
                tokens.push(Token::Number(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let token = match word.as_str() {
                    "True" => Token::True,
                    "False" => Token::False,
                    w if KEYWORDS.contains(&w) => return Err(err(format!("`{w}` is not supported"))),
                    _ => Token::Name(word),
                };
                tokens.push(token);
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

fn push(tokens: &mut Vec<Token>, i: &mut usize, token: Token, width: usize) {
    tokens.push(token);
    *i += width;
}

fn lex_string(chars: &[char], start: usize, line: usize) -> Result<(String, usize), PotError> {
    let quote = chars[start];
    let mut out = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            c if c == quote => return Ok((out, i + 1)),
            '\\' => {
                let escaped = chars.get(i + 1).ok_or(PotError::Syntax {
                    line,
                    message: "unterminated string literal".into(),
                })?;
                out.push(match escaped {
                    'n' => '\n',
                    't' => '\t',
                    other => *other,
                });
                i += 2;
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    Err(PotError::Syntax { line, message: "unterminated string literal".into() })
}
