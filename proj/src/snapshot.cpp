#include "gf/snapshot.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace gf {

using nlohmann::json;

static const char kMagic[8] = {'G', 'F', 'S', 'N', 'A', 'P', '1', '\n'};

void save_snapshot(const std::string& path, const std::vector<SnapshotField>& fields) {
    json hdr;
    hdr["format"] = 1;
    hdr["fields"] = json::array();
    for (const auto& f : fields) {
        const ChartGrid& g = *f.field->grid;
        json jf;
        jf["name"] = f.name;
        jf["chart"] = g.id;
        jf["complex_dim"] = g.m;
        jf["slots"] = f.slots;
        jf["ncomp"] = f.field->ncomp;
        jf["resolution"] = json::array();
        jf["spacing"] = json::array();
        jf["origin"] = json::array();
        jf["topology"] = json::array();
        for (const auto& a : g.axes) {
            jf["resolution"].push_back(a.n);
            jf["spacing"].push_back(a.h);
            jf["origin"].push_back(a.x0);
            jf["topology"].push_back(a.topo == Topology::Periodic ? "periodic" : "bounded");
        }
        hdr["fields"].push_back(jf);
    }
    const std::string htext = hdr.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) fail("save_snapshot: cannot open " + path);
    os.write(kMagic, 8);
    const uint64_t hlen = htext.size();
    os.write(reinterpret_cast<const char*>(&hlen), 8);
    os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& f : fields)
        os.write(reinterpret_cast<const char*>(f.field->data.data()),
                 static_cast<std::streamsize>(f.field->data.size() * sizeof(cplx)));
    if (!os) fail("save_snapshot: write failed for " + path);
}

void load_snapshot(const std::string& path, const std::vector<std::string>& names,
                   std::vector<Field*> into) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail("load_snapshot: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) fail("load_snapshot: bad magic in " + path);
    uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), 8);
    std::string htext(hlen, '\0');
    is.read(htext.data(), static_cast<std::streamsize>(hlen));
    const json hdr = json::parse(htext);
    const auto& jf = hdr["fields"];
    std::vector<std::streamoff> offsets;
    std::streamoff off = 0;
    std::vector<std::size_t> sizes;
    for (const auto& f : jf) {
        std::size_t pts = 1;
        for (const auto& r : f["resolution"]) pts *= r.get<std::size_t>();
        const std::size_t count = pts * f["ncomp"].get<std::size_t>();
        offsets.push_back(off);
        sizes.push_back(count);
        off += static_cast<std::streamoff>(count * sizeof(cplx));
    }
    const std::streamoff payload = 16 + static_cast<std::streamoff>(hlen);
    for (std::size_t k = 0; k < names.size(); ++k) {
        bool found = false;
        for (std::size_t i = 0; i < jf.size(); ++i) {
            if (jf[i]["name"] != names[k]) continue;
            if (sizes[i] != into[k]->data.size())
                fail("load_snapshot: size mismatch for field '" + names[k] + "'");
            is.seekg(payload + offsets[i]);
            is.read(reinterpret_cast<char*>(into[k]->data.data()),
                    static_cast<std::streamsize>(sizes[i] * sizeof(cplx)));
            found = true;
            break;
        }
        if (!found) fail("load_snapshot: field '" + names[k] + "' not in " + path);
    }
}

} // namespace gf
