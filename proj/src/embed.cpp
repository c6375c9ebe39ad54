#include "trailrank/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <spdlog/spdlog.h>
#include <thread>

#include "trailrank/describe.hpp"
#include "trailrank/errors.hpp"
#include "trailrank/rng.hpp"

namespace trailrank {

double EmbeddingVector::norm() const noexcept {
    double s = 0.0;
    for (const double v : values) s += v * v;
    return std::sqrt(s);
}

void ProviderSpec::validate() const {
    if (dimension < 8) throw Error(Errc::InvalidArgument, "embedding dimension must be at least 8");
    if (max_tokens < 1) throw Error(Errc::InvalidArgument, "max_tokens must be positive");
    if (kind == ProviderKind::Remote) {
        if (endpoint.empty()) throw Error(Errc::InvalidArgument, "remote provider needs an endpoint");
        if (model_name.empty()) throw Error(Errc::InvalidArgument, "remote provider needs a model name");
        if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be positive");
        if (retries < 0) throw Error(Errc::InvalidArgument, "retries must be non-negative");
    }
}

std::string ProviderSpec::cache_model_name() const {
    if (kind == ProviderKind::Reference) return "reference-trigram-v1/d" + std::to_string(dimension);
    return model_name;
}

EmbeddingVector normalized(std::vector<double> values) {
    double s = 0.0;
    for (const double v : values) s += v * v;
    if (s == 0.0) return {std::move(values), false};
    const double inv = 1.0 / std::sqrt(s);
    for (double& v : values) v = static_cast<double>(static_cast<float>(v * inv));
    return {std::move(values), false};
}

EmbeddingVector reference_embed(std::string_view text, int dimension) {
    if (dimension < 8) throw Error(Errc::InvalidArgument, "embedding dimension must be at least 8");
    const auto dim = static_cast<std::uint64_t>(dimension);
    if (text.empty()) {
        return {std::vector<double>(dim, 0.0), true};
    }
    std::string lowered(text);
    for (char& c : lowered) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    std::vector<double> counts(dim, 0.0);
    const auto add = [&](std::string_view gram) {
        const std::uint64_t h = rng::mix64(rng::fnv1a64(gram));
        counts[h % dim] += (h >> 63) ? -1.0 : 1.0;
    };
    if (lowered.size() < 3) {
        add(lowered);
    } else {
        const std::string_view view(lowered);
        for (std::size_t i = 0; i + 3 <= view.size(); ++i) add(view.substr(i, 3));
    }
    return normalized(std::move(counts));
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) throw Error(Errc::DimensionMismatch, "vectors differ in dimension");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double d = dot(a, b);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine of a zero vector is undefined");
    return std::clamp(d / (na * nb), -1.0, 1.0);
}

RankedList rank_documents(std::string query_id, const EmbeddingVector& query, std::span<const Document> docs,
                          int jobs) {
    const double qn = query.norm();
    if (qn == 0.0) throw Error(Errc::ZeroVector, "query '" + query_id + "' has a zero embedding");
    const std::size_t dim = query.dimension();
    for (const auto& d : docs) {
        if (d.vector.dimension() != dim) {
            throw Error(Errc::DimensionMismatch, "document '" + d.route_id + "' has dimension " +
                                                     std::to_string(d.vector.dimension()) + ", query has " +
                                                     std::to_string(dim));
        }
    }

    std::vector<double> scores(docs.size(), 0.0);
    const auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& v = docs[i].vector.values;
            double s = 0.0;
            double n2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                s += query.values[k] * v[k];
                n2 += v[k] * v[k];
            }
            scores[i] = n2 == 0.0 ? 0.0 : std::clamp(s / (qn * std::sqrt(n2)), -1.0, 1.0);
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                                                        std::max<std::size_t>(1, docs.size() / 1024));
    if (workers <= 1) {
        score_range(0, docs.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (docs.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk;
            const std::size_t e = std::min(docs.size(), b + chunk);
            if (b < e) pool.emplace_back(score_range, b, e);
        }
    }

    std::vector<std::uint32_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return docs[a].route_id < docs[b].route_id;
    });

    RankedList out{std::move(query_id), {}};
    out.entries.reserve(order.size());
    for (const auto i : order) out.entries.push_back({docs[i].route_id, scores[i]});
    return out;
}

ContentHash content_hash(std::string_view model_name, std::string_view text) noexcept {
    using u128 = unsigned __int128;
    const u128 prime = (static_cast<u128>(1) << 88) + 0x13B;
    u128 h = (static_cast<u128>(0x6c62272e07bb0142ULL) << 64) | 0x62b821756295c58dULL;
    const auto feed = [&](std::string_view s) {
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= prime;
        }
    };
    feed(model_name);
    feed(std::string_view("\0", 1));
    feed(text);
    ContentHash out{};
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(h & 0xff);
        h >>= 8;
    }
    return out;
}

std::size_t ContentHashHasher::operator()(const ContentHash& h) const noexcept {
    std::uint64_t v = 0;
    std::memcpy(&v, h.data(), sizeof(v));
    return static_cast<std::size_t>(v);
}

namespace {

constexpr char kCacheMagic[4] = {'T', 'R', 'V', '1'};

std::uint32_t to_le(std::uint32_t v) noexcept {
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
    return v;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) { load(); }

void EmbeddingCache::load() {
    std::unique_lock lock(mutex_);
    if (!std::filesystem::exists(*path_)) return;
    std::ifstream in(*path_, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open cache " + path_->string());
    char magic[4];
    if (!in.read(magic, 4)) {
        // Empty or torn header: start over.
        in.close();
        std::filesystem::resize_file(*path_, 0);
        return;
    }
    if (std::memcmp(magic, kCacheMagic, 4) != 0) {
        throw Error(Errc::ParseError, "cache " + path_->string() + " has an unknown header");
    }
    std::uintmax_t good = 4;
    for (;;) {
        ContentHash key;
        std::uint32_t dim_le = 0;
        if (!in.read(reinterpret_cast<char*>(key.data()), 16)) break;
        if (!in.read(reinterpret_cast<char*>(&dim_le), 4)) break;
        const std::uint32_t dim = to_le(dim_le);
        std::vector<float> values(dim);
        if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(dim) * 4)) break;
        if constexpr (std::endian::native == std::endian::big) {
            for (auto& f : values) f = std::bit_cast<float>(to_le(std::bit_cast<std::uint32_t>(f)));
        }
        entries_[key] = std::move(values);
        good += 20 + static_cast<std::uintmax_t>(dim) * 4;
    }
    in.close();
    if (std::filesystem::file_size(*path_) != good) {
        spdlog::warn("dropping torn trailing record in {}", path_->string());
        std::filesystem::resize_file(*path_, good);
    }
}

std::optional<EmbeddingVector> EmbeddingCache::find(const ContentHash& key) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    EmbeddingVector v;
    v.values.assign(it->second.begin(), it->second.end());
    return v;
}

void EmbeddingCache::insert(const ContentHash& key, const EmbeddingVector& vec) {
    std::vector<float> values(vec.values.begin(), vec.values.end());
    std::unique_lock lock(mutex_);
    if (path_) {
        const bool fresh = !std::filesystem::exists(*path_) || std::filesystem::file_size(*path_) == 0;
        if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
        std::ofstream out(*path_, std::ios::binary | std::ios::app);
        if (!out) throw Error(Errc::IoError, "cannot append to cache " + path_->string());
        if (fresh) out.write(kCacheMagic, 4);
        const std::uint32_t dim_le = to_le(static_cast<std::uint32_t>(values.size()));
        out.write(reinterpret_cast<const char*>(key.data()), 16);
        out.write(reinterpret_cast<const char*>(&dim_le), 4);
        if constexpr (std::endian::native == std::endian::big) {
            for (const float f : values) {
                const std::uint32_t le = to_le(std::bit_cast<std::uint32_t>(f));
                out.write(reinterpret_cast<const char*>(&le), 4);
            }
        } else {
            out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size()) * 4);
        }
        if (!out.flush()) throw Error(Errc::IoError, "write failed for cache " + path_->string());
    }
    entries_[key] = std::move(values);
}

std::size_t EmbeddingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::size_t warn_token_budget(std::span<const std::string> texts, int max_tokens) {
    std::size_t over = 0;
    for (const auto& t : texts) {
        const auto tokens = estimate_token_count(t);
        if (tokens > static_cast<std::size_t>(max_tokens)) {
            ++over;
            spdlog::warn("text of {} characters estimates {} tokens, above the provider limit of {}",
                         utf8_length(t), tokens, max_tokens);
        }
    }
    return over;
}

std::vector<EmbeddingVector> embed_texts(const ProviderSpec& provider, std::span<const std::string> texts,
                                         EmbeddingCache& cache) {
    provider.validate();
    if (provider.kind == ProviderKind::Remote) return remote_embed(provider, texts, cache);

    const std::string model = provider.cache_model_name();
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        const auto key = content_hash(model, t);
        if (auto hit = cache.find(key)) {
            hit->empty_text = t.empty();
            out.push_back(std::move(*hit));
            continue;
        }
        auto v = reference_embed(t, provider.dimension);
        cache.insert(key, v);
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace trailrank
