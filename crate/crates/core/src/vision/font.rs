//! Embedded 7x9 bitmap font for the digits 0-9.

pub const GLYPH_COLS: usize = 7;
pub const GLYPH_ROWS: usize = 9;

const GLYPHS: [[&str; GLYPH_ROWS]; 10] = [
    [
        " ##### ",
        "#     #",
        "#    ##",
        "#   # #",
        "#  #  #",
        "# #   #",
        "##    #",
        "#     #",
        " ##### ",
    ],
    [
        "   #   ",
        "  ##   ",
        " # #   ",
        "   #   ",
        "   #   ",
        "   #   ",
        "   #   ",
        "   #   ",
        " ##### ",
    ],
    [
        " ##### ",
        "#     #",
        "      #",
        "     # ",
        "    #  ",
        "   #   ",
        "  #    ",
        " #     ",
        "#######",
    ],
    [
        " ##### ",
        "#     #",
        "      #",
        "      #",
        "  #### ",
        "      #",
        "      #",
        "#     #",
        " ##### ",
    ],
    [
        "    #  ",
        "   ##  ",
        "  # #  ",
        " #  #  ",
        "#   #  ",
        "#######",
        "    #  ",
        "    #  ",
        "    #  ",
    ],
    [
        "#######",
        "#      ",
        "#      ",
        "# #### ",
        "##    #",
        "      #",
        "      #",
        "#     #",
        " ##### ",
    ],
    [
        " ##### ",
        "#     #",
        "#      ",
        "# #### ",
        "##    #",
        "#     #",
        "#     #",
        "#     #",
        " ##### ",
    ],
    [
        "#######",
        "      #",
        "     # ",
        "    #  ",
        "   #   ",
        "  #    ",
        "  #    ",
        "  #    ",
        "  #    ",
    ],
    [
        " ##### ",
        "#     #",
        "#     #",
        "#     #",
        " ##### ",
        "#     #",
        "#     #",
        "#     #",
        " ##### ",
    ],
    [
        " ##### ",
        "#     #",
        "#     #",
        "#    ##",
        " #### #",
        "      #",
        "      #",
        "#     #",
        " ##### ",
    ],
];

/// Bitmap for one digit, row-major, true where inked.
pub fn glyph(digit: u8) -> [[bool; GLYPH_COLS]; GLYPH_ROWS] {
    assert!(digit < 10, "digit out of range");
    let rows = &GLYPHS[digit as usize];
    let mut out = [[false; GLYPH_COLS]; GLYPH_ROWS];
    for (r, row) in rows.iter().enumerate() {
        for (c, ch) in row.bytes().enumerate() {
            out[r][c] = ch == b'#';
        }
    }
    out
}
