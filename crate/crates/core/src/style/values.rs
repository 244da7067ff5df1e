use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Display {
    Block,
    Inline,
    ListItem,
    None,
}

impl Display {
    pub fn parse(s: &str) -> Option<Display> {
        match s {
            "block" => Some(Display::Block),
            "inline" => Some(Display::Inline),
            "list-item" => Some(Display::ListItem),
            "none" => Some(Display::None),
            _ => None,
        }
    }

    pub fn is_block_level(self) -> bool {
        matches!(self, Display::Block | Display::ListItem)
    }
}

impl fmt::Display for Display {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Display::Block => "block",
            Display::Inline => "inline",
            Display::ListItem => "list-item",
            Display::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Rgb(Rgb),
    Transparent,
}

impl Color {
    pub fn parse(s: &str) -> Option<Color> {
        if s == "transparent" {
            return Some(Color::Transparent);
        }
        if let Some(hex) = s.strip_prefix('#') {
            if !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                return None;
            }
            let digit = |i: usize| u8::from_str_radix(&hex[i..i + 1], 16).unwrap();
            return match hex.len() {
                3 => Some(Color::Rgb(Rgb(digit(0) * 17, digit(1) * 17, digit(2) * 17))),
                6 => {
                    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap();
                    Some(Color::Rgb(Rgb(byte(0), byte(2), byte(4))))
                }
                _ => None,
            };
        }
        let rgb = match s {
            "black" => Rgb(0, 0, 0),
            "silver" => Rgb(192, 192, 192),
            "gray" => Rgb(128, 128, 128),
            "white" => Rgb(255, 255, 255),
            "maroon" => Rgb(128, 0, 0),
            "red" => Rgb(255, 0, 0),
            "purple" => Rgb(128, 0, 128),
            "fuchsia" => Rgb(255, 0, 255),
            "green" => Rgb(0, 128, 0),
            "lime" => Rgb(0, 255, 0),
            "olive" => Rgb(128, 128, 0),
            "yellow" => Rgb(255, 255, 0),
            "navy" => Rgb(0, 0, 128),
            "blue" => Rgb(0, 0, 255),
            "teal" => Rgb(0, 128, 128),
            "aqua" => Rgb(0, 255, 255),
            _ => return None,
        };
        Some(Color::Rgb(rgb))
    }

    pub fn rgb(self) -> Option<Rgb> {
        match self {
            Color::Rgb(c) => Some(c),
            Color::Transparent => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Rgb(c) => c.fmt(f),
            Color::Transparent => f.write_str("transparent"),
        }
    }
}

/// Computed `width`/`height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Size {
    Auto,
    Px(f64),
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Auto => f.write_str("auto"),
            Size::Px(v) => write!(f, "{}px", crate::fmt2(*v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Edges {
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
    pub left: f64,
}

impl Edges {
    pub fn horizontal(&self) -> f64 {
        self.left + self.right
    }

    pub fn vertical(&self) -> f64 {
        self.top + self.bottom
    }
}

/// Resolved style of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputedStyle {
    pub display: Display,
    pub width: Size,
    pub height: Size,
    pub margin: Edges,
    pub padding: Edges,
    pub font_size: f64,
    pub color: Color,
    pub background_color: Color,
}

pub const ROOT_FONT_SIZE: f64 = 16.0;

impl ComputedStyle {
    /// Style with nothing specified and nothing inherited.
    pub fn initial() -> Self {
        ComputedStyle {
            display: Display::Block,
            width: Size::Auto,
            height: Size::Auto,
            margin: Edges::default(),
            padding: Edges::default(),
            font_size: ROOT_FONT_SIZE,
            color: Color::Rgb(Rgb::BLACK),
            background_color: Color::Transparent,
        }
    }

    /// Style of an anonymous inline box inside a block with this style:
    /// inherited properties only.
    pub fn anonymous_inline(&self) -> Self {
        ComputedStyle {
            display: Display::Inline,
            font_size: self.font_size,
            color: self.color,
            ..ComputedStyle::initial()
        }
    }

    /// `(name, value)` pairs sorted by property name.
    pub fn properties(&self) -> Vec<(&'static str, String)> {
        let px = |v: f64| format!("{}px", crate::fmt2(v));
        vec![
            ("background-color", self.background_color.to_string()),
            ("color", self.color.to_string()),
            ("display", self.display.to_string()),
            ("font-size", px(self.font_size)),
            ("height", self.height.to_string()),
            ("margin-bottom", px(self.margin.bottom)),
            ("margin-left", px(self.margin.left)),
            ("margin-right", px(self.margin.right)),
            ("margin-top", px(self.margin.top)),
            ("padding-bottom", px(self.padding.bottom)),
            ("padding-left", px(self.padding.left)),
            ("padding-right", px(self.padding.right)),
            ("padding-top", px(self.padding.top)),
            ("width", self.width.to_string()),
        ]
    }
}
