//! The `.saf` text format: APX-style facts plus a `votes/3` statement.
//!
//! ```text
//! # two arguments attacking each other
//! arg(a). arg(b).
//! att(a,b). att(b,a).
//! votes(a, 3, 1).
//! ```
//!
//! Statements end with `.` and may share a line. `#` starts a comment that
//! runs to the end of the line. Whitespace is ignored between tokens.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::framework::{ArgumentId, FrameworkError, SocialFramework, VoteRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SafError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: second votes statement for `{argument}` (first on line {first_line})")]
    DuplicateVotes {
        line: usize,
        first_line: usize,
        argument: ArgumentId,
    },
    #[error("line {line}, column {column}: vote counts must be non-negative")]
    NegativeCount { line: usize, column: usize },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: FrameworkError },
    #[error(transparent)]
    Framework(#[from] FrameworkError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Arg(ArgumentId),
    Votes(ArgumentId, VoteRecord),
    Att(ArgumentId, ArgumentId),
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Arg(a) => write!(f, "arg({a})."),
            Statement::Votes(a, v) => write!(f, "votes({a},{},{}).", v.pro, v.con),
            Statement::Att(a, b) => write!(f, "att({a},{b})."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located {
    pub statement: Statement,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SafDocument {
    pub statements: Vec<Located>,
}

impl SafDocument {
    /// Normalised form of a framework: arguments, then attacks, then votes,
    /// one statement per line.
    pub fn from_framework(fw: &SocialFramework) -> SafDocument {
        let (args, attacks, votes) = fw.decompose();
        let statements = args
            .into_iter()
            .map(Statement::Arg)
            .chain(attacks.into_iter().map(|(a, b)| Statement::Att(a, b)))
            .chain(votes.into_iter().map(|(a, v)| Statement::Votes(a, v)))
            .enumerate()
            .map(|(i, statement)| Located { statement, line: i + 1 })
            .collect();
        SafDocument { statements }
    }

    /// Resolves declarations into a framework. Every argument referenced by
    /// `att` or `votes` must be declared with `arg`.
    pub fn to_framework(&self) -> Result<SocialFramework, FrameworkError> {
        let mut args = Vec::new();
        let mut attacks = Vec::new();
        let mut votes = BTreeMap::new();
        for located in &self.statements {
            match &located.statement {
                Statement::Arg(a) => args.push(a.clone()),
                Statement::Att(a, b) => attacks.push((a.clone(), b.clone())),
                Statement::Votes(a, v) => {
                    votes.insert(a.clone(), *v);
                }
            }
        }
        SocialFramework::build(args, attacks, &votes)
    }

    /// Line of the statement that triggered a framework error.
    fn line_of(&self, err: &FrameworkError) -> Option<usize> {
        let declared = |x: &ArgumentId| self.statements.iter().any(|l| l.statement == Statement::Arg(x.clone()));
        let mut seen = HashSet::new();
        self.statements.iter().find_map(|l| {
            let hit = match (&l.statement, err) {
                (Statement::Arg(a), FrameworkError::DuplicateArgument(d)) => a == d && !seen.insert(a.clone()),
                (Statement::Att(a, b), FrameworkError::UnknownEndpoint { attacker, target }) => {
                    a == attacker && b == target && !(declared(a) && declared(b))
                }
                (Statement::Votes(a, _), FrameworkError::UnknownArgument(u)) => a == u,
                _ => false,
            };
            hit.then_some(l.line)
        })
    }
}

/// One statement per line, in document order.
pub fn serialize_saf(doc: &SafDocument) -> String {
    let mut out = String::new();
    for located in &doc.statements {
        out.push_str(&located.statement.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_saf(text: &str) -> Result<SafDocument, SafError> {
    let mut parser = Parser::new(text);
    let mut statements = Vec::new();
    let mut votes_seen: HashMap<ArgumentId, usize> = HashMap::new();
    while let Some(located) = parser.statement()? {
        if let Statement::Votes(a, _) = &located.statement {
            if let Some(&first_line) = votes_seen.get(a) {
                return Err(SafError::DuplicateVotes {
                    line: located.line,
                    first_line,
                    argument: a.clone(),
                });
            }
            votes_seen.insert(a.clone(), located.line);
        }
        statements.push(located);
    }
    Ok(SafDocument { statements })
}

/// Reads a framework straight from `.saf` text.
pub fn parse_framework(text: &str) -> Result<SocialFramework, SafError> {
    let doc = parse_saf(text)?;
    doc.to_framework().map_err(|e| match doc.line_of(&e) {
        Some(line) => SafError::Invalid { line, source: e },
        None => SafError::Framework(e),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Negative(String),
    Open,
    Close,
    Comma,
    Dot,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Word(w) => write!(f, "`{w}`"),
            Token::Negative(w) => write!(f, "`-{w}`"),
            Token::Open => f.write_str("`(`"),
            Token::Close => f.write_str("`)`"),
            Token::Comma => f.write_str("`,`"),
            Token::Dot => f.write_str("`.`"),
        }
    }
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '#' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn syntax<T>(&self, line: usize, column: usize, message: impl Into<String>) -> Result<T, SafError> {
        Err(SafError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn word(&mut self) -> String {
        let mut w = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                w.push(c);
                self.bump();
            } else {
                break;
            }
        }
        w
    }

    /// Next token with its position, or `None` at end of input.
    fn token(&mut self) -> Result<Option<(Token, usize, usize)>, SafError> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let token = match c {
            '(' => {
                self.bump();
                Token::Open
            }
            ')' => {
                self.bump();
                Token::Close
            }
            ',' => {
                self.bump();
                Token::Comma
            }
            '.' => {
                self.bump();
                Token::Dot
            }
            '-' => {
                self.bump();
                let w = self.word();
                if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) {
                    return self.syntax(line, column, "stray `-`");
                }
                Token::Negative(w)
            }
            c if c.is_ascii_alphanumeric() || c == '_' => Token::Word(self.word()),
            other => return self.syntax(line, column, format!("unexpected character {other:?}")),
        };
        Ok(Some((token, line, column)))
    }

    fn expect(&mut self, want: Token, context: &str) -> Result<(), SafError> {
        match self.token()? {
            Some((t, _, _)) if t == want => Ok(()),
            Some((t, line, column)) => self.syntax(line, column, format!("expected {want} {context}, found {t}")),
            None => self.syntax(self.line, self.column, format!("expected {want} {context}, found end of input")),
        }
    }

    fn argument(&mut self) -> Result<ArgumentId, SafError> {
        match self.token()? {
            Some((Token::Word(w), line, column)) => ArgumentId::new(w).or_else(|e| self.syntax(line, column, e.to_string())),
            Some((t, line, column)) => self.syntax(line, column, format!("expected an argument name, found {t}")),
            None => self.syntax(self.line, self.column, "expected an argument name, found end of input"),
        }
    }

    fn count(&mut self) -> Result<u64, SafError> {
        match self.token()? {
            Some((Token::Word(w), line, column)) => {
                if !w.bytes().all(|b| b.is_ascii_digit()) {
                    return self.syntax(line, column, format!("expected a vote count, found `{w}`"));
                }
                w.parse()
                    .or_else(|_| self.syntax(line, column, format!("vote count `{w}` is too large")))
            }
            Some((Token::Negative(_), line, column)) => Err(SafError::NegativeCount { line, column }),
            Some((t, line, column)) => self.syntax(line, column, format!("expected a vote count, found {t}")),
            None => self.syntax(self.line, self.column, "expected a vote count, found end of input"),
        }
    }

    fn statement(&mut self) -> Result<Option<Located>, SafError> {
        let Some((head, line, column)) = self.token()? else {
            return Ok(None);
        };
        let Token::Word(keyword) = head else {
            return self.syntax(line, column, format!("expected a statement, found {head}"));
        };
        self.expect(Token::Open, &format!("after `{keyword}`"))?;
        let statement = match keyword.as_str() {
            "arg" => Statement::Arg(self.argument()?),
            "att" => {
                let from = self.argument()?;
                self.expect(Token::Comma, "between attack endpoints")?;
                Statement::Att(from, self.argument()?)
            }
            "votes" => {
                let arg = self.argument()?;
                self.expect(Token::Comma, "after the argument name")?;
                let pro = self.count()?;
                self.expect(Token::Comma, "between vote counts")?;
                let con = self.count()?;
                Statement::Votes(arg, VoteRecord::new(pro, con))
            }
            other => return self.syntax(line, column, format!("unknown statement `{other}`")),
        };
        self.expect(Token::Close, "to close the statement")?;
        self.expect(Token::Dot, "to end the statement")?;
        Ok(Some(Located { statement, line }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    const FIGURE1: &str = "\
# four arguments in a cycle of mutual attacks
arg(a). arg(b). arg(c). arg(d).
att(a,b). att(b,a).
att(b,c). att(c,b).
att(c,d). att(d,c).
att(d,a). att(a,d).
votes(a,1,0). votes(b,1,0). votes(c,1,0). votes(d,1,0).
";

    #[test]
    fn single_line_document() {
        let doc = parse_saf("arg(a). arg(b). att(a,b). votes(a,1,0). votes(b,1,0).").unwrap();
        let fw = doc.to_framework().unwrap();
        assert_eq!(fw.len(), 2);
        assert_eq!(fw.attack_count(), 1);
    }

    #[test]
    fn figure1_file() {
        let fw = parse_framework(FIGURE1).unwrap();
        assert_eq!(fw, fixtures::figure1());
    }

    #[test]
    fn crlf_and_spacing() {
        let text = "arg( a ) .\r\narg(b).\r\natt( a , b ).\r\nvotes( b , 2 , 3 ).  # trailing\r\n";
        let fw = parse_framework(text).unwrap();
        assert_eq!(fw.votes()[1], VoteRecord::new(2, 3));
    }

    #[test]
    fn negative_count() {
        assert_eq!(
            parse_saf("votes(a,-1,0).").unwrap_err(),
            SafError::NegativeCount { line: 1, column: 9 }
        );
    }

    #[test]
    fn duplicate_votes() {
        let err = parse_saf("arg(a).\nvotes(a,1,0).\nvotes(a,2,0).").unwrap_err();
        assert!(matches!(err, SafError::DuplicateVotes { line: 3, first_line: 2, .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_saf("arg(a).\narg(b) att(a,b).") {
            Err(SafError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_saf("foo(a)."), Err(SafError::Syntax { line: 1, column: 1, .. })));
        assert!(matches!(parse_saf("arg(a"), Err(SafError::Syntax { .. })));
        assert!(matches!(parse_saf("votes(a,x,0)."), Err(SafError::Syntax { .. })));
        assert!(matches!(parse_saf("arg(a-b)."), Err(SafError::Syntax { .. })));
        assert!(matches!(parse_saf("arg(a);"), Err(SafError::Syntax { .. })));
    }

    #[test]
    fn undeclared_references_rejected() {
        let doc = parse_saf("arg(a). att(a,b).").unwrap();
        assert!(matches!(doc.to_framework(), Err(FrameworkError::UnknownEndpoint { .. })));
        let doc = parse_saf("arg(a). votes(b,1,0).").unwrap();
        assert!(matches!(doc.to_framework(), Err(FrameworkError::UnknownArgument(_))));
    }

    #[test]
    fn forward_references_allowed() {
        let fw = parse_framework("att(a,b). votes(b,1,1). arg(b). arg(a).").unwrap();
        assert_eq!(fw.attack_count(), 1);
    }

    #[test]
    fn empty_and_comment_only() {
        assert!(parse_saf("").unwrap().statements.is_empty());
        assert!(parse_saf("# nothing\n\n   \n").unwrap().statements.is_empty());
    }

    fn statement_strategy() -> impl Strategy<Value = Statement> {
        let name = "[a-zA-Z0-9_]{1,6}".prop_map(|s| ArgumentId::new(s).unwrap());
        prop_oneof![
            name.clone().prop_map(Statement::Arg),
            (name.clone(), name.clone()).prop_map(|(a, b)| Statement::Att(a, b)),
            (name, any::<u64>(), any::<u64>()).prop_map(|(a, p, c)| Statement::Votes(a, VoteRecord::new(p, c))),
        ]
    }

    proptest! {
        #[test]
        fn normalized_documents_round_trip(statements in proptest::collection::vec(statement_strategy(), 0..30)) {
            // keep only the first votes statement per argument
            let mut seen = HashSet::new();
            let statements: Vec<_> = statements
                .into_iter()
                .filter(|s| match s {
                    Statement::Votes(a, _) => seen.insert(a.clone()),
                    _ => true,
                })
                .enumerate()
                .map(|(i, statement)| Located { statement, line: i + 1 })
                .collect();
            let doc = SafDocument { statements };
            prop_assert_eq!(parse_saf(&serialize_saf(&doc)).unwrap(), doc);
        }
    }

    #[test]
    fn framework_round_trip() {
        let fw = fixtures::example2();
        let text = serialize_saf(&SafDocument::from_framework(&fw));
        assert_eq!(parse_framework(&text).unwrap(), fw);
    }
}
