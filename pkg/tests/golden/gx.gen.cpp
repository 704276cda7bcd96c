// generated kernel: gx
// BFV parameters: poly_modulus_degree >= 64, plain_modulus = 65537, slots = 32
#include "seal/seal.h"

void gx(seal::Evaluator &evaluator, const seal::GaloisKeys &gal_keys,
        const seal::RelinKeys &relin_keys,
        const seal::Ciphertext &img,
        const seal::Plaintext &two,
        seal::Ciphertext &result)
{
    seal::Ciphertext ct0;
    evaluator.rotate_rows(img, 27, gal_keys, ct0);
    seal::Ciphertext ct1;
    evaluator.add(ct0, img, ct1);
    seal::Ciphertext ct2;
    evaluator.rotate_rows(ct1, 5, gal_keys, ct2);
    seal::Ciphertext ct3;
    evaluator.add(ct2, ct1, ct3);
    seal::Ciphertext ct4;
    evaluator.rotate_rows(ct3, 1, gal_keys, ct4);
    seal::Ciphertext ct5;
    evaluator.rotate_rows(ct3, 31, gal_keys, ct5);
    seal::Ciphertext ct6;
    evaluator.sub(ct4, ct5, ct6);
    result = ct6;
}
