#include "docstruct/chunking.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace docstruct {

void validate(const ChunkPlanConfig& cfg) {
    if (cfg.stride < 1) throw Error("chunking.BadConfig", "stride must be >= 1");
    if (cfg.threshold >= cfg.stride) {
        throw Error("chunking.BadConfig", "threshold " + std::to_string(cfg.threshold) +
                                              " must be smaller than stride " +
                                              std::to_string(cfg.stride));
    }
}

PageProfile page_profile(const CanonicalDocument& doc, std::span<const ElementType> task_types) {
    PageProfile p;
    p.counts.assign(std::max<std::size_t>(doc.page_count, 1), 0);
    for (const auto& e : doc.elements) {
        if (e.page >= p.counts.size()) continue;
        if (std::find(task_types.begin(), task_types.end(), e.etype) != task_types.end()) {
            ++p.counts[e.page];
        }
    }
    return p;
}

std::size_t ChunkPlan::overlap_width(std::size_t i) const {
    if (i + 1 >= chunks.size()) return 0;
    const auto& a = chunks[i];
    const auto& b = chunks[i + 1];
    const auto lo = std::max(a.start, b.start);
    const auto hi = std::min(a.end, b.end);
    return hi >= lo ? hi - lo + 1 : 0;
}

std::vector<std::size_t> compute_boundaries(const PageProfile& profile, const ChunkPlanConfig& cfg) {
    validate(cfg);
    if (profile.counts.empty()) throw Error("chunking.BadConfig", "page_count must be >= 1");
    const std::size_t p_max = profile.counts.size() - 1;
    std::vector<std::size_t> b{0};
    while (true) {
        const std::size_t lo = b.back() + cfg.stride - cfg.threshold;
        if (lo > p_max) break;
        const std::size_t hi = std::min(b.back() + cfg.stride + cfg.threshold, p_max);
        std::size_t best = lo;
        for (std::size_t p = lo + 1; p <= hi; ++p) {
            if (profile.counts[p] > profile.counts[best]) best = p;
        }
        b.push_back(best);
    }
    return b;
}

std::vector<PageRange> build_chunks(std::span<const std::size_t> boundaries, std::size_t p_max) {
    std::vector<PageRange> out;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        const std::size_t start = boundaries[i] == 0 ? 0 : boundaries[i] - 1;
        const std::size_t end = i + 1 < boundaries.size() ? std::min(boundaries[i + 1] + 1, p_max) : p_max;
        out.push_back({start, end});
    }
    return out;
}

ChunkPlan plan_chunks(const PageProfile& profile, const ChunkPlanConfig& cfg) {
    ChunkPlan plan;
    plan.boundaries = compute_boundaries(profile, cfg);
    plan.chunks = build_chunks(plan.boundaries, profile.counts.size() - 1);
    return plan;
}

ChunkPlan single_chunk_plan(std::size_t page_count) {
    ChunkPlan plan;
    plan.boundaries = {0};
    plan.chunks = {{0, page_count == 0 ? 0 : page_count - 1}};
    return plan;
}

Json to_json(const ChunkPlan& plan) {
    Json j;
    j["boundaries"] = plan.boundaries;
    Json chunks = Json::array();
    for (const auto& c : plan.chunks) chunks.push_back(Json::array({c.start, c.end}));
    j["chunks"] = std::move(chunks);
    Json overlaps = Json::array();
    for (std::size_t i = 0; i + 1 < plan.chunks.size(); ++i) overlaps.push_back(plan.overlap_width(i));
    j["overlap_widths"] = std::move(overlaps);
    return j;
}

int round_deviation(double avg) {
    return static_cast<int>(avg < 0 ? -std::floor(-avg + 0.5) : std::floor(avg + 0.5));
}

SyncResult synchronize_hierarchy(std::vector<ChunkLevels> chunk_preds) {
    std::sort(chunk_preds.begin(), chunk_preds.end(),
              [](const ChunkLevels& a, const ChunkLevels& b) { return a.chunk_index < b.chunk_index; });
    SyncResult out;
    if (chunk_preds.empty()) return out;

    for (const auto& [idx, level] : chunk_preds.front().levels) out.levels.emplace(idx, level);

    for (std::size_t k = 1; k < chunk_preds.size(); ++k) {
        const auto& prev = chunk_preds[k - 1];
        const auto& cur = chunk_preds[k];
        std::set<std::size_t> prev_ids;
        for (const auto& [idx, _] : prev.levels) prev_ids.insert(idx);

        long long sum = 0;
        std::size_t n = 0;
        for (const auto& [idx, raw] : cur.levels) {
            if (!prev_ids.count(idx) || raw < 1) continue;
            const int calibrated = out.levels.at(idx);
            if (calibrated < 1) continue;
            sum += calibrated - raw;
            ++n;
        }
        SyncStep step;
        step.chunk_index = cur.chunk_index;
        step.overlap_titles = n;
        if (n == 0) {
            step.empty_overlap = true;
            add_issue(out.issues, "chunking.EmptyOverlap",
                      "chunk " + std::to_string(cur.chunk_index) +
                          " shares no titles with the previous chunk; deviation 0");
        } else {
            step.deviation = round_deviation(static_cast<double>(sum) / static_cast<double>(n));
        }
        for (const auto& [idx, raw] : cur.levels) {
            if (out.levels.count(idx)) continue; // earlier chunk wins
            const int level = raw < 1 ? -1 : std::max(1, raw + step.deviation);
            out.levels.emplace(idx, level);
        }
        out.steps.push_back(step);
    }
    return out;
}

PairUnion merge_union(std::vector<ChunkPairs> chunk_preds, PairKind kind) {
    std::sort(chunk_preds.begin(), chunk_preds.end(),
              [](const ChunkPairs& a, const ChunkPairs& b) { return a.chunk_index < b.chunk_index; });
    PairUnion out;
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    std::map<std::size_t, std::size_t> target_of;
    for (const auto& chunk : chunk_preds) {
        for (const auto& p : chunk.pairs) {
            if (kind == PairKind::association) {
                auto [it, inserted] = target_of.emplace(p.first, p.second);
                if (!inserted) {
                    if (it->second != p.second) {
                        add_issue(out.issues, "chunking.AssociationConflict",
                                  "src " + std::to_string(p.first) + " -> " + std::to_string(p.second) +
                                      " in chunk " + std::to_string(chunk.chunk_index) +
                                      " conflicts with earlier target " + std::to_string(it->second),
                                  p.first);
                    }
                    continue;
                }
            }
            pairs.insert(p);
        }
    }
    out.pairs.assign(pairs.begin(), pairs.end());
    return out;
}

JudgementUnion merge_union(std::vector<ChunkJudgements> chunk_preds) {
    std::sort(chunk_preds.begin(), chunk_preds.end(),
              [](const ChunkJudgements& a, const ChunkJudgements& b) { return a.chunk_index < b.chunk_index; });
    JudgementUnion out;
    for (const auto& chunk : chunk_preds) {
        for (const auto& [key, vec] : chunk.judgements) {
            auto [it, inserted] = out.judgements.emplace(key, vec);
            if (!inserted && it->second != vec) {
                add_issue(out.issues, "chunking.JudgementConflict",
                          "table pair (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                              ") judged differently in chunk " + std::to_string(chunk.chunk_index),
                          key.first);
            }
        }
    }
    return out;
}

} // namespace docstruct
