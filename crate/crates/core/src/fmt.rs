/// Fixed two-decimal rendering used by every geometry dump. Exact binary
/// ties round half to even.
pub fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}
