//! Arithmetic expressions for real-valued flags, e.g. `1/(1+3*sqrt(3))`.
//!
//! Grammar: numbers, `+ - * /`, unary minus, parentheses and `sqrt(...)`.

pub fn parse_real(s: &str) -> Result<f64, String> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(format!("unexpected '{}' at position {}", &s[p.pos..], p.pos));
    }
    if !v.is_finite() {
        return Err(format!("'{s}' does not evaluate to a finite number"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v += self.term()?;
            } else if self.eat(b'-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.factor()?;
        loop {
            if self.eat(b'*') {
                v *= self.factor()?;
            } else if self.eat(b'/') {
                v /= self.factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, String> {
        if self.eat(b'-') {
            return Ok(-self.factor()?);
        }
        if self.eat(b'+') {
            return self.factor();
        }
        if self.eat(b'(') {
            let v = self.expr()?;
            if !self.eat(b')') {
                return Err(format!("missing ')' at position {}", self.pos));
            }
            return Ok(v);
        }
        if self.src[self.pos..].starts_with(b"sqrt") {
            self.pos += 4;
            if !self.eat(b'(') {
                return Err("expected '(' after sqrt".into());
            }
            let v = self.expr()?;
            if !self.eat(b')') {
                return Err(format!("missing ')' at position {}", self.pos));
            }
            if v < 0.0 {
                return Err(format!("sqrt of negative number {v}"));
            }
            return Ok(v.sqrt());
        }
        self.number()
    }

    fn number(&mut self) -> Result<f64, String> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut q = self.pos + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                self.pos = q;
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii slice");
        if text.is_empty() {
            return Err(format!("expected a number at position {start}"));
        }
        text.parse::<f64>().map_err(|e| format!("bad number '{text}': {e}"))
    }
}
