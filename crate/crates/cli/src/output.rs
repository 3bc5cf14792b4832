use serde_json::Value;

use crate::job::Format;

pub fn render(records: &[Value], format: Format) -> String {
    match format {
        Format::Jsonl => records.iter().map(|r| format!("{r}\n")).collect(),
        Format::Table => table(records),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(xs) if xs.iter().all(|x| x.is_string()) => xs.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// One aligned table per run of records with the same columns.
fn table(records: &[Value]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < records.len() {
        let keys = columns(&records[i]);
        let mut j = i + 1;
        while j < records.len() && columns(&records[j]) == keys {
            j += 1;
        }
        let rows: Vec<Vec<String>> = records[i..j].iter().map(|r| keys.iter().map(|k| cell(&r[k.as_str()])).collect()).collect();
        let widths: Vec<usize> =
            keys.iter().enumerate().map(|(c, k)| rows.iter().map(|r| r[c].len()).chain([k.len()]).max().unwrap()).collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        if !out.is_empty() {
            out.push('\n');
        }
        out += &format!("[{}]\n", cell(&records[i]["record"]));
        out += &line(&keys);
        for r in &rows {
            out += &line(r);
        }
        i = j;
    }
    out
}

fn columns(r: &Value) -> Vec<String> {
    r.as_object()
        .map(|m| m.keys().filter(|k| *k != "schema" && *k != "record").cloned().collect())
        .unwrap_or_default()
}
