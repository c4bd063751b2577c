#include <algorithm>
#include <cstdio>

#include "idforge/error.hpp"
#include "idforge/parallel.hpp"
#include "idforge/rng.hpp"
#include "idforge/texture.hpp"

namespace idforge::texture {

namespace {

int mirror(int i, int n) {
    const int k = i % (2 * n);
    return k < n ? k : 2 * n - 1 - k;
}

}  // namespace

ImageBuffer apply_texture(const ImageBuffer& base, const TextureResidual& t, std::uint64_t seed,
                          const ApplyOptions& options) {
    const bool fits = t.width >= base.width() && t.height >= base.height();
    if (!fits && !options.tile) {
        throw Error(ErrorKind::ResidualTooSmall, "residual " + std::to_string(t.width) + "x" + std::to_string(t.height) +
                                                     " is smaller than base " + std::to_string(base.width()) + "x" +
                                                     std::to_string(base.height()));
    }
    Rng rng(seed);
    auto offset = [&](int tex, int img) {
        return static_cast<int>(tex >= img ? rng.uniform_int(0, tex - img) : rng.uniform_int(0, tex - 1));
    };
    const int ox = offset(t.width, base.width());
    const int oy = offset(t.height, base.height());

    ImageBuffer out = base;
    for (int y = 0; y < base.height(); ++y) {
        const int ty = mirror(oy + y, t.height);
        std::uint8_t* px = out.row(y);
        for (int x = 0; x < base.width(); ++x, px += 3) {
            if (options.foreground_only && px[0] == 0 && px[1] == 0 && px[2] == 0) continue;
            const int tx = mirror(ox + x, t.width);
            for (int c = 0; c < 3; ++c) {
                px[c] = static_cast<std::uint8_t>(std::clamp(px[c] + t.at(tx, ty, c), 0, 255));
            }
        }
    }
    return out;
}

TextureBatchResult batch_textures(const TextureBatchOptions& options) {
    TextureBatchResult result;
    if (options.count == 0) return result;

    const auto bases = list_images(options.bonafide_dir);
    if (bases.empty()) throw Error(ErrorKind::IoError, "no bona fide images in " + options.bonafide_dir.string());

    std::error_code ec;
    if (!std::filesystem::is_directory(options.residual_store, ec)) {
        throw Error(ErrorKind::IoError, options.residual_store.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> residuals;
    for (const auto& entry : std::filesystem::directory_iterator(options.residual_store)) {
        if (entry.is_regular_file() && entry.path().extension() == ".texr") residuals.push_back(entry.path());
    }
    std::sort(residuals.begin(), residuals.end());
    std::erase_if(residuals, [&](const auto& p) { return species_of(read_residual_header(p).pais) != options.species; });
    if (residuals.empty()) {
        throw Error(ErrorKind::InvalidArgument, "residual store " + options.residual_store.string() + " has no " +
                                                    std::string(to_string(options.species)) + " residuals");
    }

    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + options.out_dir.string());

    const auto image_class =
        options.species == Species::Print ? data::ImageClass::Print : data::ImageClass::Screen;
    std::vector<std::optional<data::ManifestRow>> rows(options.count);
    std::vector<std::optional<std::string>> errors(options.count);

    parallel_for(options.count, options.threads, [&](std::size_t i) {
        const std::uint64_t item_seed = options.base_seed + i;
        try {
            Rng pick(mix_seed(item_seed, 0));
            const auto& residual_path = residuals[pick.index(residuals.size())];
            const ImageBuffer base = read_png(bases[i % bases.size()]);
            const TextureResidual residual = read_residual(residual_path);
            const ImageBuffer out = apply_texture(base, residual, mix_seed(item_seed, 1), options.apply);

            char name[64];
            std::snprintf(name, sizeof name, "%s_%06zu.png", std::string(to_string(options.species)).c_str(), i);
            const auto path = options.out_dir / name;
            write_png(path, out);
            rows[i] = data::ManifestRow{path.string(), image_class, data::Origin::Textures, data::Split::Train, item_seed};
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < options.count; ++i) {
        if (rows[i]) result.manifest.push_back(std::move(*rows[i]));
        if (errors[i]) result.failures.push_back({i, std::move(*errors[i])});
    }
    return result;
}

}  // namespace idforge::texture
