#include "binopt/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#ifdef BINOPT_HAVE_PNG
#include <png.h>
#include <csetjmp>
#endif

namespace binopt {

namespace {

struct TokenReader {
    std::istream& in;
    const std::filesystem::path& path;

    // PNM headers: tokens separated by whitespace, '#' starts a comment to EOL.
    std::string next_token() {
        std::string tok;
        int c;
        while ((c = in.get()) != EOF) {
            if (c == '#') {
                while ((c = in.get()) != EOF && c != '\n') {
                }
            } else if (!std::isspace(c)) {
                break;
            }
        }
        if (c == EOF) throw IoError("malformed header (unexpected end of file): " + path.string());
        do {
            tok.push_back(char(c));
        } while ((c = in.get()) != EOF && !std::isspace(c) && c != '#');
        if (c != EOF) in.unget();  // the byte after the token is the caller's
        return tok;
    }

    int next_int() {
        const std::string tok = next_token();
        try {
            std::size_t pos = 0;
            const int v = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw IoError("malformed header (expected integer, got \"" + tok + "\"): " + path.string());
        }
    }
};

GrayImage load_pnm(std::istream& in, const std::filesystem::path& path) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    const bool p5 = magic[0] == 'P' && magic[1] == '5';
    const bool p6 = magic[0] == 'P' && magic[1] == '6';
    if (!p5 && !p6) throw IoError("unsupported format (expected P5/P6 graymap/pixmap): " + path.string());

    TokenReader tr{in, path};
    const int w = tr.next_int();
    const int h = tr.next_int();
    const int maxval = tr.next_int();
    if (w < 1 || h < 1) throw IoError("malformed header (bad dimensions): " + path.string());
    if (maxval != 255)
        throw IoError("unsupported bit depth (maxval " + std::to_string(maxval) + ", want 255): " +
                      path.string());
    // exactly one whitespace byte between header and raster
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw IoError("malformed header (missing raster separator): " + path.string());

    GrayImage img(w, h);
    if (p5) {
        in.read(reinterpret_cast<char*>(img.data.data()), std::streamsize(img.pixel_count()));
        if (std::size_t(in.gcount()) != img.pixel_count())
            throw IoError("truncated pixel data: " + path.string());
    } else {
        std::vector<std::uint8_t> rgb(img.pixel_count() * 3);
        in.read(reinterpret_cast<char*>(rgb.data()), std::streamsize(rgb.size()));
        if (std::size_t(in.gcount()) != rgb.size())
            throw IoError("truncated pixel data: " + path.string());
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            const double y =
                0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
            img.data[i] = std::uint8_t(std::lround(y));
        }
    }
    return img;
}

#ifdef BINOPT_HAVE_PNG

GrayImage load_png(std::FILE* fp, const std::filesystem::path& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png reader initialisation failed: " + path.string());
    }
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("malformed png: " + path.string());
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    // Normalise everything to 8-bit gray; BT.601 weights for colour input.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_expand(png);
    const int color = png_get_color_type(png, info);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, 29900, 58700);
    png_read_update_info(png, info);

    const int w = int(png_get_image_width(png, info));
    const int h = int(png_get_image_height(png, info));
    pixels.resize(std::size_t(w) * h);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + std::size_t(y) * w;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img(w, h);
    img.data = std::move(pixels);
    return img;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open for writing: " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png write failed: " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.data.data() + std::size_t(y) * img.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

#endif  // BINOPT_HAVE_PNG

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()), std::streamsize(img.pixel_count()));
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

void save_gray(const GrayImage& img, const std::filesystem::path& path) {
    // temp + rename: a failed save never leaves a partial file at `path`
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    try {
#ifdef BINOPT_HAVE_PNG
        if (path.extension() == ".png") {
            save_png(img, tmp);
        } else {
            write_pgm(img, tmp);
        }
#else
        write_pgm(img, tmp);
#endif
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    const int c0 = in.peek();
    if (c0 == 'P') return load_pnm(in, path);
#ifdef BINOPT_HAVE_PNG
    if (c0 == 0x89) {
        in.close();
        std::FILE* fp = std::fopen(path.c_str(), "rb");
        if (!fp) throw IoError("cannot open: " + path.string());
        try {
            GrayImage img = load_png(fp, path);
            std::fclose(fp);
            return img;
        } catch (...) {
            std::fclose(fp);
            throw;
        }
    }
#endif
    throw IoError("unsupported format: " + path.string());
}

void save_image(const GrayImage& img, const std::filesystem::path& path) { save_gray(img, path); }

void save_image(const BinaryImage& img, const std::filesystem::path& path) {
    save_gray(to_gray(img), path);
}

}  // namespace binopt
