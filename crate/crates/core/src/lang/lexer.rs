use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    Dot,
    Comma,
    Semi,
    Bar,
    If,
    DoubleColon,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Question,
    Minus,
    NegSlash,
    Count,
    Cmp(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Bar => "`|`".into(),
            Tok::If => "`:-`".into(),
            Tok::DoubleColon => "`::`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Question => "`?`".into(),
            Tok::Minus => "`-`".into(),
            Tok::NegSlash => "`\\+`".into(),
            Tok::Count => "`#count`".into(),
            Tok::Cmp(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! push {
        ($t:expr, $len:expr) => {{
            out.push(Token { tok: $t, line, col });
            i += $len;
            col += $len;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '.' => push!(Tok::Dot, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '|' => push!(Tok::Bar, 1),
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '?' => push!(Tok::Question, 1),
            '-' => push!(Tok::Minus, 1),
            ':' => match next {
                Some('-') => push!(Tok::If, 2),
                Some(':') => push!(Tok::DoubleColon, 2),
                _ => push!(Tok::Colon, 1),
            },
            '\\' if next == Some('+') => push!(Tok::NegSlash, 2),
            '<' => match next {
                Some('=') => push!(Tok::Cmp("<="), 2),
                Some('>') => push!(Tok::Cmp("!="), 2),
                _ => push!(Tok::Cmp("<"), 1),
            },
            '>' => match next {
                Some('=') => push!(Tok::Cmp(">="), 2),
                _ => push!(Tok::Cmp(">"), 1),
            },
            '=' => match next {
                Some('=') => push!(Tok::Cmp("="), 2),
                _ => push!(Tok::Cmp("="), 1),
            },
            '!' if next == Some('=') => push!(Tok::Cmp("!="), 2),
            '#' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                if word != "count" {
                    return Err(ParseError::new(line, col, format!("unsupported directive `#{word}`")));
                }
                push!(Tok::Count, j - i)
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                push!(Tok::Number(text), j - start)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                let tok = if c.is_ascii_lowercase() { Tok::Ident(text) } else { Tok::Var(text) };
                push!(tok, j - start)
            }
            other => return Err(ParseError::new(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
