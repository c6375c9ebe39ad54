#include <chrono>
#include <cmath>
#include <httplib.h>
#include <spdlog/spdlog.h>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "trailrank/embed.hpp"
#include "trailrank/errors.hpp"

namespace trailrank {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::InvalidArgument, "endpoint needs a scheme: " + url);
    if (url.compare(0, scheme_end, "http") != 0) {
        throw Error(Errc::InvalidArgument, "only http endpoints are supported: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<EmbeddingVector> parse_vectors(const std::string& body, std::size_t expected, int dimension) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedResponse, std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array()) {
        throw Error(Errc::MalformedResponse, "response lacks a \"vectors\" array");
    }
    const auto& rows = doc["vectors"];
    if (rows.size() != expected) {
        throw Error(Errc::MalformedResponse, "expected " + std::to_string(expected) + " vectors, got " +
                                                 std::to_string(rows.size()));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(expected);
    for (const auto& row : rows) {
        if (!row.is_array()) throw Error(Errc::MalformedResponse, "vector row is not an array");
        if (row.size() != static_cast<std::size_t>(dimension)) {
            throw Error(Errc::DimensionMismatch, "provider returned dimension " + std::to_string(row.size()) +
                                                     ", expected " + std::to_string(dimension));
        }
        std::vector<double> values;
        values.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number()) throw Error(Errc::MalformedResponse, "vector component is not a number");
            const double v = x.get<double>();
            if (!std::isfinite(v)) throw Error(Errc::MalformedResponse, "vector component is not finite");
            values.push_back(v);
        }
        out.push_back(normalized(std::move(values)));
    }
    return out;
}

std::string post_with_retries(httplib::Client& client, const std::string& path, const std::string& body,
                              int retries) {
    std::string last_error;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 5)));
        auto res = client.Post(path, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            spdlog::warn("embedding request failed ({}), attempt {}/{}", last_error, attempt + 1, retries + 1);
            continue;
        }
        if (res->status == 200) return res->body;
        last_error = "HTTP status " + std::to_string(res->status);
        // Client errors will not improve on retry.
        if (res->status >= 400 && res->status < 500) break;
        spdlog::warn("embedding request got {}, attempt {}/{}", last_error, attempt + 1, retries + 1);
    }
    throw Error(Errc::TransportError, "embedding service unavailable: " + last_error);
}

}  // namespace

std::vector<EmbeddingVector> remote_embed(const ProviderSpec& provider, std::span<const std::string> texts,
                                          EmbeddingCache& cache) {
    provider.validate();
    if (texts.empty()) return {};
    warn_token_budget(texts, provider.max_tokens);

    const std::string model = provider.cache_model_name();
    std::vector<EmbeddingVector> out(texts.size());
    // Unique uncached texts, each mapped to every position it fills.
    std::vector<std::string> pending;
    std::unordered_map<std::string, std::vector<std::size_t>> slots;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (auto hit = cache.find(content_hash(model, texts[i]))) {
            out[i] = std::move(*hit);
            continue;
        }
        auto [it, fresh] = slots.try_emplace(texts[i]);
        if (fresh) pending.push_back(texts[i]);
        it->second.push_back(i);
    }
    if (pending.empty()) return out;

    const auto ep = split_endpoint(provider.endpoint);
    httplib::Client client(ep.base);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(provider.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    const auto batch = static_cast<std::size_t>(provider.batch_size);
    for (std::size_t start = 0; start < pending.size(); start += batch) {
        const std::size_t end = std::min(pending.size(), start + batch);
        nlohmann::json req;
        req["model"] = provider.model_name;
        req["texts"] = nlohmann::json::array();
        for (std::size_t i = start; i < end; ++i) req["texts"].push_back(pending[i]);
        const auto body = post_with_retries(client, ep.path, req.dump(), provider.retries);
        auto vectors = parse_vectors(body, end - start, provider.dimension);
        for (std::size_t i = start; i < end; ++i) {
            auto& v = vectors[i - start];
            v.empty_text = pending[i].empty();
            cache.insert(content_hash(model, pending[i]), v);
            for (const auto pos : slots[pending[i]]) out[pos] = v;
        }
        spdlog::debug("embedded batch of {} texts", end - start);
    }
    return out;
}

}  // namespace trailrank
