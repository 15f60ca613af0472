use crate::geometry::{iou, BBox};

/// Orders indices by descending score, ties broken by lower index.
pub(crate) fn score_order(scores: impl Iterator<Item = f64>) -> Vec<usize> {
    let scores: Vec<f64> = scores.collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Greedy non-maximum suppression.
///
/// Repeatedly keeps the highest-scoring remaining box and drops every other
/// remaining box overlapping it with IoU above `thresh`. Returns the indices
/// of the kept boxes in descending-score order.
pub fn nms(boxes: &[(BBox, f64)], thresh: f64) -> Vec<usize> {
    let order = score_order(boxes.iter().map(|b| b.1));
    let mut suppressed = vec![false; boxes.len()];
    let mut keep = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(i);
        for &j in &order[pos + 1..] {
            if !suppressed[j] && iou(&boxes[i].0, &boxes[j].0) > thresh {
                suppressed[j] = true;
            }
        }
    }
    keep
}
