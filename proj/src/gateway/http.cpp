#include "probesense/gateway/http.hpp"

#include <algorithm>
#include <cctype>

#include "probesense/core/errors.hpp"

namespace probesense::gateway {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Value of `key=` inside a header like `form-data; name="map"; filename="a.png"`.
std::string header_param(std::string_view header, std::string_view key) {
    std::size_t pos = 0;
    while (pos < header.size()) {
        auto semi = header.find(';', pos);
        auto token = trim(header.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos));
        const auto eq = token.find('=');
        if (eq != std::string_view::npos && lower(trim(token.substr(0, eq))) == key) {
            auto value = trim(token.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            return std::string(value);
        }
        if (semi == std::string_view::npos) break;
        pos = semi + 1;
    }
    return {};
}

}  // namespace

std::string url_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out += ' ';
        } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
                   std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::map<std::string, std::string> parse_query(std::string_view qs) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos <= qs.size() && !qs.empty()) {
        const auto amp = qs.find('&', pos);
        const auto pair = qs.substr(pos, amp == std::string_view::npos ? std::string_view::npos : amp - pos);
        if (!pair.empty()) {
            const auto eq = pair.find('=');
            if (eq == std::string_view::npos) {
                out[url_decode(pair)] = "";
            } else {
                out[url_decode(pair.substr(0, eq))] = url_decode(pair.substr(eq + 1));
            }
        }
        if (amp == std::string_view::npos) break;
        pos = amp + 1;
    }
    return out;
}

HttpRequest HttpRequest::make(std::string method, std::string_view target, std::string body) {
    HttpRequest r;
    r.method = std::move(method);
    const auto q = target.find('?');
    r.path = url_decode(target.substr(0, q));
    if (q != std::string_view::npos) r.query = parse_query(target.substr(q + 1));
    r.body = std::move(body);
    return r;
}

std::optional<std::string> HttpRequest::header(const std::string& lowercase_name) const {
    const auto it = headers.find(lowercase_name);
    if (it == headers.end()) return std::nullopt;
    return it->second;
}

std::vector<MultipartPart> parse_multipart(std::string_view content_type, std::string_view body) {
    if (lower(trim(content_type.substr(0, content_type.find(';')))) != "multipart/form-data") {
        throw ValidationError("content-type", "expected multipart/form-data");
    }
    const auto boundary = header_param(content_type, "boundary");
    if (boundary.empty()) throw ValidationError("content-type", "missing multipart boundary");
    const std::string delim = "--" + boundary;

    std::vector<MultipartPart> parts;
    auto pos = body.find(delim);
    if (pos == std::string_view::npos) throw ValidationError("body", "multipart boundary not found");
    while (true) {
        pos += delim.size();
        if (body.substr(pos, 2) == "--") break;
        if (body.substr(pos, 2) != "\r\n") throw ValidationError("body", "malformed multipart delimiter");
        pos += 2;
        const auto header_end = body.find("\r\n\r\n", pos);
        if (header_end == std::string_view::npos) throw ValidationError("body", "unterminated part headers");
        MultipartPart part;
        auto headers = body.substr(pos, header_end - pos);
        std::size_t hp = 0;
        while (hp <= headers.size()) {
            const auto eol = headers.find("\r\n", hp);
            const auto line = headers.substr(hp, eol == std::string_view::npos ? std::string_view::npos : eol - hp);
            const auto colon = line.find(':');
            if (colon != std::string_view::npos) {
                const auto name = lower(trim(line.substr(0, colon)));
                const auto value = trim(line.substr(colon + 1));
                if (name == "content-disposition") {
                    part.name = header_param(value, "name");
                    part.filename = header_param(value, "filename");
                } else if (name == "content-type") {
                    part.content_type = std::string(value);
                }
            }
            if (eol == std::string_view::npos) break;
            hp = eol + 2;
        }
        const auto data_start = header_end + 4;
        const auto next = body.find("\r\n" + delim, data_start);
        if (next == std::string_view::npos) throw ValidationError("body", "unterminated multipart part");
        part.data = std::string(body.substr(data_start, next - data_start));
        if (part.name.empty()) throw ValidationError("body", "part without a name");
        parts.push_back(std::move(part));
        pos = next + 2;
    }
    return parts;
}

}  // namespace probesense::gateway
