package demo.math;

public class Matrix {
    private final double[][] data;

    public Matrix(int rows, int cols) {
        data = new double[rows][cols];
    }

    /**
     * Multiplies this matrix by another matrix and returns the product matrix.
     */
    public Matrix multiply(Matrix other) {
        int rows = data.length;
        int cols = other.data[0].length;
        Matrix product = new Matrix(rows, cols);
        for (int i = 0; i < rows; i++) {
            for (int j = 0; j < cols; j++) {
                double sum = 0;
                for (int k = 0; k < other.data.length; k++) {
                    sum += data[i][k] * other.data[k][j];
                }
                product.data[i][j] = sum;
            }
        }
        return product;
    }

    /** Returns the transpose of this matrix. */
    public Matrix transpose() {
        Matrix result = new Matrix(data[0].length, data.length);
        for (int i = 0; i < data.length; i++) {
            for (int j = 0; j < data[0].length; j++) {
                result.data[j][i] = data[i][j];
            }
        }
        return result;
    }
}
