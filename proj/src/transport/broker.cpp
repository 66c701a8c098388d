#include "probesense/transport/broker.hpp"

#include <vector>

namespace probesense::transport {

namespace {

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find('/', start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

bool is_valid_topic(std::string_view topic) {
    if (topic.empty()) return false;
    return topic.find_first_of("+#") == std::string_view::npos && topic.find('\0') == std::string_view::npos;
}

bool is_valid_pattern(std::string_view pattern) {
    if (pattern.empty()) return false;
    const auto segs = split(pattern);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto seg = segs[i];
        if (seg == "#") {
            if (i + 1 != segs.size()) return false;
            continue;
        }
        if (seg == "+") continue;
        if (seg.find_first_of("+#") != std::string_view::npos) return false;
    }
    return true;
}

bool topic_matches(std::string_view pattern, std::string_view topic) {
    const auto p = split(pattern);
    const auto t = split(topic);
    std::size_t i = 0;
    for (; i < p.size(); ++i) {
        if (p[i] == "#") return true;
        if (i >= t.size()) return false;
        if (p[i] != "+" && p[i] != t[i]) return false;
    }
    return i == t.size();
}

std::shared_ptr<BoundedQueue<Message>> subscribe_queue(Session& session, const std::string& pattern,
                                                       std::size_t capacity) {
    auto queue = std::make_shared<BoundedQueue<Message>>(capacity);
    session.subscribe(pattern, [queue](const Message& m) { queue->push(m); });
    return queue;
}

}  // namespace probesense::transport
