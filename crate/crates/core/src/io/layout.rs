//! Text layouts of an alignment: rows across the page, or rotated with New
//! in the leftmost column.

use crate::alignment::{Alignment, Node};
use crate::corpus::SymbolTable;

/// Cells of one unified item, by display row.
struct Item {
    rows: Vec<usize>,
    width: usize,
    text: String,
}

fn items(a: &Alignment, symbols: &SymbolTable, display: &[usize]) -> Vec<Item> {
    let mut slot_of = vec![0; a.rows().len()];
    for (d, &r) in display.iter().enumerate() {
        slot_of[r] = d;
    }
    a.nodes()
        .iter()
        .map(|&node| {
            let mut rows: Vec<usize> = match node {
                Node::Column(c) => a.columns()[c]
                    .cells
                    .iter()
                    .map(|c| slot_of[c.row])
                    .collect(),
                Node::Cell(c) => vec![slot_of[c.row]],
            };
            rows.sort_unstable();
            let text = symbols.name(a.node_symbol(node)).to_string();
            Item {
                rows,
                width: text.chars().count(),
                text,
            }
        })
        .collect()
}

/// Rows across the page, New on top, `|` joining the members of a column.
pub fn render_horizontal(a: &Alignment, symbols: &SymbolTable) -> String {
    let display = a.display_row_order();
    let items = items(a, symbols, &display);
    let n = display.len();
    // Next free x per display row; an item spanning rows lo..=hi also
    // reserves the rows it passes through so connectors stay clear.
    let mut end = vec![0usize; n];
    let mut xs = Vec::with_capacity(items.len());
    for it in &items {
        let lo = it.rows[0];
        let hi = *it.rows.last().unwrap();
        let x = (lo..=hi).map(|r| end[r]).max().unwrap_or(0);
        for e in &mut end[lo..=hi] {
            *e = x + it.width + 1;
        }
        xs.push(x);
    }
    let width = end.iter().copied().max().unwrap_or(0);
    let label_w = (n - 1).to_string().len();
    let mut out = String::new();
    for d in 0..n {
        let mut line = vec![' '; width];
        for (it, &x) in items.iter().zip(&xs) {
            if it.rows.contains(&d) {
                for (k, ch) in it.text.chars().enumerate() {
                    line[x + k] = ch;
                }
            }
        }
        let body: String = line.into_iter().collect();
        out.push_str(&format!("{d:>label_w$}  {body} {d}\n"));
        if d + 1 < n {
            let mut conn = vec![' '; width];
            for (it, &x) in items.iter().zip(&xs) {
                if it.rows[0] <= d && *it.rows.last().unwrap() > d {
                    conn[x] = '|';
                }
            }
            let conn: String = conn.into_iter().collect();
            out.push_str(format!("{:label_w$}  {}\n", "", conn).trim_end());
            out.push('\n');
        }
    }
    out
}

/// One text column per row (New leftmost), one line per unified item;
/// members of a column are joined by runs of `-`.
pub fn render_vertical(a: &Alignment, symbols: &SymbolTable) -> String {
    let display = a.display_row_order();
    let items = items(a, symbols, &display);
    let n = display.len();
    let mut col_w = vec![1usize; n];
    for (d, w) in col_w.iter_mut().enumerate() {
        *w = (*w).max(d.to_string().len());
    }
    for it in &items {
        for &d in &it.rows {
            col_w[d] = col_w[d].max(it.width);
        }
    }
    const GAP: usize = 6;
    let mut out = String::new();
    let header: Vec<String> = (0..n).map(|d| format!("{d:<w$}", w = col_w[d])).collect();
    out.push_str(header.join(&" ".repeat(GAP)).trim_end());
    out.push('\n');
    for it in &items {
        let lo = it.rows[0];
        let hi = *it.rows.last().unwrap();
        let mut line = String::new();
        for d in 0..n {
            let inside = d > lo && d < hi;
            if it.rows.contains(&d) {
                line.push_str(&it.text);
                let pad = col_w[d] - it.width;
                if d < hi && pad > 0 {
                    line.push(' ');
                    line.push_str(&"-".repeat(pad - 1));
                } else {
                    line.push_str(&" ".repeat(pad));
                }
            } else if inside {
                line.push_str(&"-".repeat(col_w[d]));
            } else {
                line.push_str(&" ".repeat(col_w[d]));
            }
            if d + 1 < n {
                if d >= lo && d < hi {
                    line.push(' ');
                    line.push_str(&"-".repeat(GAP - 2));
                    line.push(' ');
                } else {
                    line.push_str(&" ".repeat(GAP));
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
