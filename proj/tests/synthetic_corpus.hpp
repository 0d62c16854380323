#ifndef A2T_TESTS_SYNTHETIC_CORPUS_HPP
#define A2T_TESTS_SYNTHETIC_CORPUS_HPP

#include <a2t/corpus.hpp>
#include <a2t/random.hpp>

#include <array>
#include <cstdio>
#include <vector>

namespace a2t::testing {

// Per label x source cell: total records and how many of them carry a
// human label. Cell order: NotFunny/NLP, NotFunny/ML, FUNNY/NLP, FUNNY/ML.
struct CorpusShape {
    std::array<std::size_t, 4> total;
    std::array<std::size_t, 4> human;
};

// Interleaves cells with a seeded shuffle so ids carry no label signal.
inline std::vector<corpus::PaperRecord> make_synthetic_corpus(const CorpusShape& shape, std::uint64_t seed) {
    using namespace corpus;
    std::vector<PaperRecord> out;
    std::size_t next = 0;
    Rng rng(seed);
    for (std::size_t c = 0; c < 4; ++c) {
        const bool funny = c >= 2;
        const Source src = (c % 2 == 0) ? Source::NLP : Source::ML;
        for (std::size_t k = 0; k < shape.total[c]; ++k) {
            PaperRecord r;
            char id[32];
            std::snprintf(id, sizeof id, "r%06zu", next++);
            r.id = id;
            r.title = "Title " + r.id;
            r.abstract = "An abstract for " + r.id + " with a few words.";
            r.venue = src == Source::NLP ? "ACL" : "ICML";
            r.year = 2001 + static_cast<int>(rng.below(20));
            r.source = src;
            r.humor_label = funny ? (rng.below(4) == 0 ? HumorLevel::Funny : HumorLevel::MediumFunny)
                                  : HumorLevel::NotFunny;
            r.humor_label_origin = k < shape.human[c] ? LabelOrigin::Human : LabelOrigin::Classifier;
            out.push_back(std::move(r));
        }
    }
    rng.shuffle(out);
    return out;
}

// Label/source margins from the published final-dataset table; the joint
// cells and the human-labeled share are fixture choices.
inline CorpusShape table8_shape() {
    return CorpusShape{{16201, 15340, 900, 511}, {1000, 918, 90, 37}};
}

} // namespace a2t::testing

#endif // A2T_TESTS_SYNTHETIC_CORPUS_HPP
